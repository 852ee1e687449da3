from __future__ import annotations

import enum
from dataclasses import dataclass


class BranchingRule(str, enum.Enum):
    MOST_FRACTIONAL = "most-fractional"
    FIRST_FRACTIONAL = "first-fractional"


class NodeOrder(str, enum.Enum):
    BEST_BOUND = "best-bound"
    DEPTH_FIRST = "depth-first"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and search options for the LP and branch-and-bound layers.

    ``time_limit`` is in seconds; ``None`` means no limit.  ``seed`` is carried
    for reproducibility records only: the built-in rules are deterministic.
    ``dive`` runs a fix-and-resolve heuristic from the root relaxation to find
    an early incumbent.
    """

    feas_tol: float = 1e-7
    int_tol: float = 1e-6
    opt_tol: float = 1e-9
    time_limit: float | None = None
    branching: BranchingRule = BranchingRule.MOST_FRACTIONAL
    node_order: NodeOrder = NodeOrder.BEST_BOUND
    seed: int = 0
    pivot_tol: float = 1e-11
    ratio_pivot_tol: float = 1e-9
    degenerate_streak: int = 50
    refactor_interval: int = 100
    max_lp_iterations: int | None = None
    warm_start: bool = True
    lp_method: str = "dual"
    max_nodes: int | None = None
    dive: bool = True

    def __post_init__(self):
        for name in ("feas_tol", "int_tol", "opt_tol", "pivot_tol", "ratio_pivot_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be non-negative")
        if self.lp_method not in ("primal", "dual"):
            raise ValueError(f"lp_method must be 'primal' or 'dual', got {self.lp_method!r}")
        object.__setattr__(self, "branching", BranchingRule(self.branching))
        object.__setattr__(self, "node_order", NodeOrder(self.node_order))
