import csv
import json
import subprocess
import sys

import pytest

from clinroster.cli import BENCH_FIELDS, main
from clinroster.files import dump_instance, load_instance
from clinroster.ilpcore import read_lp
from clinroster.model import Clinician, ProblemInstance
from clinroster.simgen import SimParams, generate


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(dump_instance(generate(SimParams(4, 2, 5, seed=1))))
    return path


def test_solve_writes_schedule_and_sidecar(tiny, tmp_path, capsys):
    out = tmp_path / "plan.csv"
    assert main(["solve", str(tiny), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 5 * 2
    side = json.loads((tmp_path / "plan.audit.json").read_text())
    assert side["status"] == "optimal"
    assert side["audit"]["all_hard_pass"] is True
    assert set(side["objective_terms"]) == {"block_requests", "weekend_requests", "adjacency"}
    assert all(-1 <= v <= 1 for v in side["normalized_terms"].values())
    assert "optimal" in capsys.readouterr().out
    assert main(["validate", str(tiny), str(out)]) == 0


def test_single_clinician_two_blocks_is_infeasible(tmp_path):
    # one weekend, so only the block rule bites
    inst = ProblemInstance(1, 2, 1, (Clinician("solo", frozenset(), frozenset(), (0,), (2,)),))
    path = tmp_path / "solo.json"
    path.write_text(dump_instance(inst))
    assert main(["solve", str(path), "-o", str(tmp_path / "s.csv")]) == 2
    assert not (tmp_path / "s.csv").exists()
    assert json.loads((tmp_path / "s.audit.json").read_text())["presolve"]
    assert main(["solve", str(path), "-o", str(tmp_path / "s.csv"), "--ncb", "off"]) == 0


def test_time_limit_exit_code(tmp_path):
    path = tmp_path / "big.json"
    path.write_text(dump_instance(generate(SimParams(10, 2, 26, seed=0))))
    assert main(["solve", str(path), "-o", str(tmp_path / "b.csv"), "--time-limit", "0"]) == 3


def test_input_errors(tmp_path, tiny, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(tiny.read_text().replace('"blocks": 5', '"blocks": -5'))
    assert main(["solve", str(bad)]) == 1
    assert "bad.json:" in capsys.readouterr().err
    invalid = tmp_path / "invalid.json"
    invalid.write_text(tiny.read_text().replace('"max": [\n        3', '"max": [\n        0'))
    assert main(["solve", str(invalid), "-o", str(tmp_path / "x.csv")]) == 1
    assert main(["validate", str(tiny), str(tmp_path / "missing.csv")]) == 1
    assert main(["solve"]) == 1
    assert main(["solve", str(tiny), "--weights", "1,2"]) == 1


def test_validate_flags_consecutive_weekends(tiny, tmp_path, capsys):
    out = tmp_path / "plan.csv"
    main(["solve", str(tiny), "-o", str(out)])
    rows = list(csv.reader(out.open()))
    rows[2][-1] = rows[1][-1]  # weekend 2 to whoever has weekend 1
    with open(out, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    capsys.readouterr()
    assert main(["validate", str(tiny), str(out)]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_generate_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["generate", "-C", "10", "-S", "2", "-B", "26", "-W", "51", "--seed", "42"]
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert (inst.num_clinicians, inst.num_weekends) == (10, 51)
    assert main(["generate", "-C", "1", "-S", "1", "-B", "4"]) == 1


def test_generate_flags(capsys):
    assert main(["generate", "-C", "3", "-S", "1", "-B", "4", "--requests", "2", "--weekend-requests", "0",
                 "--ncb", "off", "--weights", "1,0,0.5", "--long-weekends", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["ncb_mode"] == "off"
    assert doc["weights"] == [1.0, 0.0, 0.5]
    assert len(doc["long_weekends"]) == 1
    assert all(len(c["block_requests"]) == 2 and not c["weekend_requests"] for c in doc["clinicians"])


def test_export_lp(tiny, tmp_path):
    lp = tmp_path / "m.lp"
    assert main(["solve", str(tiny), "-o", str(tmp_path / "p.csv"), "--export-lp", str(lp)]) == 0
    assert read_lp(lp).num_vars > 0


def test_bench_appends_with_seeds(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"cells": [{"num_clinicians": [3, 4], "num_services": 1, "num_blocks": 4,
                                           "seed": 7}, {"num_clinicians": 1, "num_services": 1,
                                                        "num_blocks": 3}],
                                "repetitions": 2, "time_limit": 60}))
    out = tmp_path / "bench.csv"
    assert main(["bench", str(grid), str(out)]) == 0
    assert main(["bench", str(grid), str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == BENCH_FIELDS
    assert len(rows) == 12
    assert out.read_text().count("cell,repetition") == 1
    assert [r["seed"] for r in rows[:6]] == ["7", "8", "7", "8", "0", "1"]
    assert {r["status"] for r in rows[:4]} == {"optimal"}
    assert rows[4]["status"] == "error"  # one clinician cannot avoid consecutive blocks
    assert "linear fit of wall_time vs num_clinicians" in capsys.readouterr().out


def test_bench_grid_errors(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"cells": [{"bogus": 1}]}))
    assert main(["bench", str(grid), str(tmp_path / "o.csv")]) == 1
    grid.write_text("{")
    assert main(["bench", str(grid), str(tmp_path / "o.csv")]) == 1


def test_module_entry_point(tiny, tmp_path):
    r = subprocess.run([sys.executable, "-m", "clinroster", "solve", str(tiny), "-o", str(tmp_path / "m.csv")],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
