"""0-1 integer linear programming: LP relaxation by simplex, exact search by branch-and-bound."""

from .bnb import CutGenerator, IntegralSolution, IPStatus, branch_and_bound, objective_lattice
from .config import BranchingRule, NodeOrder, SolverConfig
from .lpfile import read_lp, write_lp
from .problem import Ilp01, IlpBuilder, Row, Sense, check_feasible
from .simplex import Basis, LPStatus, NumericalInstability, RelaxedSolution, solve_relaxation

__all__ = [
    "Basis",
    "BranchingRule",
    "CutGenerator",
    "Ilp01",
    "IlpBuilder",
    "IntegralSolution",
    "IPStatus",
    "LPStatus",
    "NodeOrder",
    "NumericalInstability",
    "RelaxedSolution",
    "Row",
    "Sense",
    "SolverConfig",
    "branch_and_bound",
    "check_feasible",
    "objective_lattice",
    "read_lp",
    "solve_relaxation",
    "write_lp",
]
