"""Clinician block and weekend rostering as a 0-1 integer program."""

from .files import FormatError, dump_instance, format_schedule, load_instance, load_schedule, parse_instance
from .formulation import ObjectiveBreakdown, VariableLayout, build, decode, objective_breakdown
from .model import (
    AdjacencyMap,
    Clinician,
    NcbMode,
    ObjectiveWeights,
    ProblemInstance,
    feasibility_presolve,
    validate_instance,
)
from .oracle import TooLarge, brute_force
from .pipeline import InvalidInstance, SolveOutcome, solve_instance
from .simgen import ParamError, SimParams, generate
from .validator import AuditReport, Schedule, audit

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMap",
    "AuditReport",
    "Clinician",
    "FormatError",
    "InvalidInstance",
    "NcbMode",
    "ObjectiveBreakdown",
    "ObjectiveWeights",
    "ParamError",
    "ProblemInstance",
    "Schedule",
    "SimParams",
    "SolveOutcome",
    "TooLarge",
    "VariableLayout",
    "audit",
    "brute_force",
    "build",
    "decode",
    "dump_instance",
    "feasibility_presolve",
    "format_schedule",
    "generate",
    "load_instance",
    "load_schedule",
    "objective_breakdown",
    "parse_instance",
    "solve_instance",
    "validate_instance",
]
