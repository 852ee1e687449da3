import io

import numpy as np
import pytest

from clinroster.formulation import build
from clinroster.ilpcore import Ilp01, read_lp, write_lp
from clinroster.simgen import SimParams, generate


def same_problem(a: Ilp01, b: Ilp01) -> None:
    assert a.var_names == b.var_names
    assert a.row_names == b.row_names
    assert a.senses == b.senses
    assert np.array_equal(a.rhs, b.rhs)
    assert np.array_equal(a.objective, b.objective)
    assert (a.matrix != b.matrix).nnz == 0


def test_round_trip_scheduling_model():
    p, _ = build(generate(SimParams(4, 2, 6, num_long_weekends=3, seed=3)))
    buf = io.StringIO()
    write_lp(p, buf, "tiny")
    text = buf.getvalue()
    assert text.splitlines()[1] == "Maximize"
    assert "Subject To" in text and "Binaries" in text and text.rstrip().endswith("End")
    same_problem(p, read_lp(io.StringIO(text)))


def test_round_trip_awkward_coefficients(tmp_path):
    p = Ilp01.from_rows(
        3,
        [([(0, 1e-05), (1, -2.5), (2, 1 / 3)], "<=", 0.1), ([(0, 1.0)], ">=", 0), ([(1, 1), (2, 1)], "=", 1)],
        [1 / 7, -3.0, 0.0],
    )
    path = tmp_path / "m.lp"
    write_lp(p, path)
    same_problem(p, read_lp(path))


def test_long_rows_are_wrapped():
    n = 200
    p = Ilp01.from_rows(n, [([(j, 1.0) for j in range(n)], "<=", 5)], [1.0] * n)
    buf = io.StringIO()
    write_lp(p, buf)
    assert max(len(line) for line in buf.getvalue().splitlines()) <= 255
    same_problem(p, read_lp(io.StringIO(buf.getvalue())))


def test_rejects_names_lp_cannot_hold():
    p = Ilp01.from_rows(1, [([(0, 1)], "<=", 1)], [1], var_names=["bad name"])
    with pytest.raises(ValueError):
        write_lp(p, io.StringIO())
