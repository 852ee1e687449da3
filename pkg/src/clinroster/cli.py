"""Command-line interface: ``clinroster {solve,validate,generate,bench}``.

Exit codes: 0 optimal / all checks pass, 1 bad input, 2 infeasible,
3 time limit reached, 4 schedule fails a hard constraint.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .files import FormatError, dump_instance, format_schedule, load_instance, load_schedule
from .formulation import build
from .ilpcore import IPStatus, SolverConfig, write_lp
from .model import NcbMode, ObjectiveWeights, ProblemInstance
from .pipeline import InvalidInstance, SolveOutcome, solve_instance
from .simgen import ParamError, SimParams, generate
from .validator import audit

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_HARD_FAIL = 0, 1, 2, 3, 4
STATUS_EXIT = {IPStatus.OPTIMAL: EXIT_OK, IPStatus.INFEASIBLE: EXIT_INFEASIBLE, IPStatus.TIMED_OUT: EXIT_TIMEOUT}
DEFAULT_BENCH_LIMIT = 300.0

BENCH_FIELDS = [
    "cell", "repetition", "num_clinicians", "num_services", "num_blocks", "num_weekends",
    "num_long_weekends", "requests_per_clinician", "weekend_requests_per_clinician",
    "ncb_mode", "seed", "time_limit", "status", "wall_time", "node_count",
    "objective", "block_score", "weekend_score", "adjacency_score",
]

log = logging.getLogger("clinroster")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _weights(text: str) -> ObjectiveWeights:
    try:
        return ObjectiveWeights.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ncb(text: str) -> NcbMode:
    try:
        return NcbMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _overrides(inst: ProblemInstance, args) -> ProblemInstance:
    changes = {}
    if getattr(args, "ncb", None) is not None:
        changes["ncb_mode"] = args.ncb
    if getattr(args, "weights", None) is not None:
        changes["weights"] = args.weights
    return dataclasses.replace(inst, **changes) if changes else inst


def outcome_summary(out: SolveOutcome) -> dict:
    sol = out.solution
    d: dict = {"status": out.status.value, "wall_time": out.wall_time, "node_count": out.node_count}
    if out.presolve_flags:
        d["presolve"] = list(out.presolve_flags)
    if sol is not None:
        d["root_bound"] = sol.root_bound
        d["best_bound"] = sol.best_bound
        d["lp_iterations"] = sol.lp_iterations
    if out.breakdown is not None:
        bd = out.breakdown
        d["objective"] = bd.weighted
        d["objective_terms"] = {"block_requests": bd.block_score, "weekend_requests": bd.weekend_score,
                                "adjacency": bd.adjacency_score}
        d["normalized_terms"] = {"block_requests": bd.block_norm, "weekend_requests": bd.weekend_norm,
                                 "adjacency": bd.adjacency_norm}
    if out.report is not None:
        d["audit"] = out.report.to_dict()
    return d


# ------------------------------------------------------------------ commands


def sidecar_path(schedule_path: Path) -> Path:
    """``plan.csv`` -> ``plan.audit.json``."""
    return schedule_path.with_name(schedule_path.stem + ".audit.json")


def cmd_solve(args) -> int:
    try:
        inst = _overrides(load_instance(args.instance), args)
    except FormatError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if args.export_lp:
        try:
            p, _ = build(inst)
            write_lp(p, args.export_lp, Path(args.instance).stem)
        except (ValueError, IndexError) as exc:
            _err(f"cannot export LP: {exc}")
            return EXIT_INPUT
    cfg = SolverConfig(time_limit=args.time_limit, seed=args.seed)
    try:
        out = solve_instance(inst, cfg)
    except InvalidInstance as exc:
        for v in exc.violations:
            _err(f"{args.instance}: {v}")
        return EXIT_INPUT
    out_path = Path(args.output)
    if out.schedule is not None:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(format_schedule(out.schedule, inst))
    side = sidecar_path(out_path)
    side.write_text(json.dumps(outcome_summary(out), indent=2) + "\n")
    msg = f"{out.status.value}"
    if out.breakdown is not None:
        msg += f"  objective {out.breakdown.weighted:.6f}  terms {out.breakdown.triple}"
    msg += f"  nodes {out.node_count}  {out.wall_time:.2f}s"
    print(msg)
    for flag in out.presolve_flags:
        print(f"presolve: {flag}")
    if out.report is not None:
        print(out.report.format())
    return STATUS_EXIT[out.status]


def cmd_validate(args) -> int:
    try:
        inst = load_instance(args.instance)
        sch = load_schedule(args.schedule, inst)
    except FormatError as exc:
        _err(str(exc))
        return EXIT_INPUT
    rep = audit(sch, inst)
    print(rep.format())
    return EXIT_OK if rep.all_hard_pass else EXIT_HARD_FAIL


def cmd_generate(args) -> int:
    params = SimParams(
        num_clinicians=args.clinicians,
        num_services=args.services,
        num_blocks=args.blocks,
        num_weekends=args.weekends,
        num_long_weekends=args.long_weekends,
        requests_per_clinician=args.requests,
        weekend_requests_per_clinician=args.weekend_requests,
        ncb_mode=args.ncb or NcbMode.PER_SERVICE,
        seed=args.seed,
    )
    try:
        inst = generate(params, args.weights)
    except ParamError as exc:
        _err(str(exc))
        return EXIT_INPUT
    text = dump_instance(inst)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return EXIT_OK


# --------------------------------------------------------------------- bench

_SIM_FIELDS = {f.name for f in dataclasses.fields(SimParams)}


def expand_grid(grid: dict) -> list[dict]:
    """Cells of a grid file; list-valued fields expand as a Cartesian product."""
    cells = grid.get("cells")
    if not isinstance(cells, list) or not cells:
        raise ValueError("grid file needs a non-empty 'cells' list")
    out = []
    for i, cell in enumerate(cells, start=1):
        if not isinstance(cell, dict):
            raise ValueError(f"cell {i} must be an object")
        unknown = set(cell) - _SIM_FIELDS
        if unknown:
            raise ValueError(f"cell {i}: unknown fields {sorted(unknown)}")
        keys = list(cell)
        axes = [cell[k] if isinstance(cell[k], list) else [cell[k]] for k in keys]
        for combo in itertools.product(*axes):
            out.append(dict(zip(keys, combo)))
    return out


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float] | None:
    """(slope, intercept, R^2) of a least-squares line, or None if x is constant."""
    if len(set(xs)) < 2:
        return None
    r = stats.linregress(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    return float(r.slope), float(r.intercept), float(r.rvalue ** 2)


def run_cell(params: SimParams, time_limit: float) -> dict:
    """One bench record; failures become status ``error`` instead of raising."""
    rec = {k: v for k, v in params.to_dict().items() if k in BENCH_FIELDS}
    rec["num_weekends"] = params.weekends
    rec["weekend_requests_per_clinician"] = params.weekend_requests
    rec["num_long_weekends"] = params.long_weekends
    rec["time_limit"] = time_limit
    try:
        inst = generate(params)
        out = solve_instance(inst, SolverConfig(time_limit=time_limit, seed=params.seed))
    except (ParamError, InvalidInstance) as exc:
        log.warning("cell %s failed: %s", params, exc)
        rec.update(status="error", wall_time=0.0, node_count=0, objective="",
                   block_score="", weekend_score="", adjacency_score="")
        return rec
    rec.update(status=out.status.value, wall_time=round(out.wall_time, 6), node_count=out.node_count)
    if out.breakdown is not None:
        rec.update(objective=repr(out.breakdown.weighted), block_score=out.breakdown.block_score,
                   weekend_score=out.breakdown.weekend_score, adjacency_score=out.breakdown.adjacency_score)
    else:
        rec.update(objective="", block_score="", weekend_score="", adjacency_score="")
    return rec


def cmd_bench(args) -> int:
    try:
        grid = json.loads(Path(args.grid).read_text())
        if not isinstance(grid, dict):
            raise ValueError("grid file must be a JSON object")
        cells = expand_grid(grid)
        reps = int(grid.get("repetitions", 1))
        if reps < 1:
            raise ValueError("repetitions must be >= 1")
        limit = args.time_limit if args.time_limit is not None else float(grid.get("time_limit", DEFAULT_BENCH_LIMIT))
        params = []
        for cell in cells:
            base = dict(cell)
            seed0 = int(base.pop("seed", args.seed))
            params.append([SimParams(**base, seed=seed0 + r) for r in range(reps)])
    except json.JSONDecodeError as exc:
        _err(f"{args.grid}:{exc.lineno}: {exc.msg}")
        return EXIT_INPUT
    except (OSError, ValueError, TypeError) as exc:
        _err(f"{args.grid}: {exc}")
        return EXIT_INPUT

    out_path = Path(args.output)
    new_file = not out_path.exists() or out_path.stat().st_size == 0
    records = []
    with open(out_path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        if new_file:
            writer.writeheader()
        for ci, reps_params in enumerate(params, start=1):
            for r, p in enumerate(reps_params):
                rec = run_cell(p, limit)
                rec.update(cell=ci, repetition=r)
                writer.writerow(rec)
                fh.flush()
                records.append(rec)
                print(f"cell {ci} rep {r}: C={p.num_clinicians} S={p.num_services} B={p.num_blocks} "
                      f"ncb={p.ncb_mode.value} seed={p.seed} -> {rec['status']} "
                      f"{rec['wall_time']:.2f}s nodes {rec['node_count']}")

    ok = [r for r in records if r["status"] != "error"]
    for key in ("num_blocks", "num_clinicians", "requests_per_clinician", "num_services"):
        fit = linear_fit([r[key] for r in ok], [r["wall_time"] for r in ok])
        if fit is not None:
            slope, icept, r2 = fit
            print(f"linear fit of wall_time vs {key}: slope {slope:.4g} s/unit, intercept {icept:.4g} s, "
                  f"R^2 {r2:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clinroster", description="Clinician block and weekend rostering.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve an instance and write the schedule CSV")
    sp.add_argument("instance")
    sp.add_argument("-o", "--output", default="schedule.csv",
                    help="schedule CSV; the audit goes to <name>.audit.json beside it")
    sp.add_argument("--time-limit", type=float, default=None, help="seconds")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ncb", type=_ncb, default=None, help="per-service | cross-service | off")
    sp.add_argument("--weights", type=_weights, default=None, help="w_block,w_weekend,w_pair")
    sp.add_argument("--export-lp", default=None, metavar="PATH", help="also write the model in LP format")
    sp.set_defaults(func=cmd_solve)

    vp = sub.add_parser("validate", help="audit a schedule CSV against an instance")
    vp.add_argument("instance")
    vp.add_argument("schedule")
    vp.set_defaults(func=cmd_validate)

    gp = sub.add_parser("generate", help="write a simulated instance")
    gp.add_argument("-C", "--clinicians", type=int, required=True)
    gp.add_argument("-S", "--services", type=int, required=True)
    gp.add_argument("-B", "--blocks", type=int, default=26)
    gp.add_argument("-W", "--weekends", type=int, default=None, help="default 2B-1")
    gp.add_argument("--long-weekends", type=int, default=None, help="default round(10*B/26)")
    gp.add_argument("--requests", type=int, default=5, help="block requests per clinician")
    gp.add_argument("--weekend-requests", type=int, default=None, help="default: same as --requests")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--ncb", type=_ncb, default=None)
    gp.add_argument("--weights", type=_weights, default=None)
    gp.add_argument("-o", "--output", default=None)
    gp.set_defaults(func=cmd_generate)

    bp = sub.add_parser("bench", help="run a benchmark grid and append records to a CSV")
    bp.add_argument("grid")
    bp.add_argument("output")
    bp.add_argument("--time-limit", type=float, default=None,
                    help=f"seconds per cell (default: grid value or {DEFAULT_BENCH_LIMIT:g})")
    bp.add_argument("--seed", type=int, default=0, help="seed for cells that do not set one")
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
