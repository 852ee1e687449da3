"""Instance in, audited schedule out."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .formulation import ObjectiveBreakdown, VariableLayout, build, decode, objective_breakdown
from .ilpcore import IntegralSolution, IPStatus, SolverConfig, branch_and_bound
from .model import ProblemInstance, feasibility_presolve, validate_instance
from .validator import AuditReport, Schedule, audit


class InvalidInstance(ValueError):
    def __init__(self, violations: tuple[str, ...]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class SolveOutcome:
    status: IPStatus
    schedule: Schedule | None
    breakdown: ObjectiveBreakdown | None
    report: AuditReport | None
    solution: IntegralSolution | None
    layout: VariableLayout
    presolve_flags: tuple[str, ...]
    wall_time: float

    @property
    def node_count(self) -> int:
        return self.solution.node_count if self.solution else 0


def solve_instance(inst: ProblemInstance, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Validate, presolve, build, branch and bound, decode and audit.

    Raises :class:`InvalidInstance` when structural validation fails.  A
    presolve verdict of infeasible short-circuits the search.  A timed-out
    search still decodes and audits its incumbent, if any.
    """
    start = time.monotonic()
    rep = validate_instance(inst)
    if not rep.ok:
        raise InvalidInstance(rep.violations)
    layout = VariableLayout.for_instance(inst)
    pre = feasibility_presolve(inst)
    if pre.infeasible:
        return SolveOutcome(IPStatus.INFEASIBLE, None, None, None, None, layout, pre.flags,
                            time.monotonic() - start)
    p, layout = build(inst)
    sol = branch_and_bound(p, cfg or SolverConfig())
    sch = breakdown = report = None
    if sol.values is not None:
        sch = decode(layout, sol)
        breakdown = objective_breakdown(layout, sol.values, inst)
        report = audit(sch, inst)
    return SolveOutcome(sol.status, sch, breakdown, report, sol, layout, (), time.monotonic() - start)
