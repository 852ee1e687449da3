"""Audit a schedule against the hard rules and score its soft objectives.

The checks here are written directly against the rule definitions rather
than through the ILP rows, so they can judge schedules from any source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .model import NcbMode, ProblemInstance

HARD_CONSTRAINTS = ("BC", "WC", "MM", "NCB", "NCW", "EW", "EH")

HARD_LABELS = {
    "BC": "Block Coverage",
    "WC": "Weekend Coverage",
    "MM": "Min/Max",
    "NCB": "No Consecutive Blocks",
    "NCW": "No Consecutive Weekends",
    "EW": "Equal Weekends",
    "EH": "Equal Holidays",
}


@dataclass(frozen=True)
class Schedule:
    """Clinician (1-based) per (block, service) and per weekend."""

    block_assignee: Mapping[tuple[int, int], int]
    weekend_assignee: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "block_assignee", dict(sorted(self.block_assignee.items())))
        object.__setattr__(self, "weekend_assignee", dict(sorted(self.weekend_assignee.items())))

    def is_total(self, inst: ProblemInstance) -> bool:
        want_b = {(b, s) for b in inst.blocks for s in inst.services}
        return set(self.block_assignee) == want_b and set(self.weekend_assignee) == set(inst.weekends)

    def blocks_of(self, c: int) -> set[int]:
        return {b for (b, _), who in self.block_assignee.items() if who == c}


@dataclass(frozen=True)
class Verdict:
    name: str
    violations: tuple[tuple[int, ...], ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Ratio:
    num: int
    denom: int

    def __str__(self) -> str:
        return f"{self.num}/{self.denom}"


@dataclass(frozen=True)
class AuditReport:
    verdicts: dict[str, Verdict]
    satisfied_block_requests: Ratio
    satisfied_weekend_requests: Ratio
    adjacent_pairs: Ratio
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def all_hard_pass(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "hard": {
                k: {"pass": v.passed, "violations": [list(site) for site in v.violations]}
                for k, v in self.verdicts.items()
            },
            "soft": {
                "satisfied_block_requests": str(self.satisfied_block_requests),
                "satisfied_weekend_requests": str(self.satisfied_weekend_requests),
                "adjacent_pairs": str(self.adjacent_pairs),
            },
            "all_hard_pass": self.all_hard_pass,
        }

    def format(self) -> str:
        lines = ["Constraint"]
        for k in HARD_CONSTRAINTS:
            v = self.verdicts[k]
            mark = "pass" if v.passed else f"FAIL ({len(v.violations)} violations)"
            lines.append(f"  {HARD_LABELS[k]:<26} {k:<4} {mark}")
        lines.append("Objective")
        lines.append(f"  {'Satisfied Block Requests':<31} {self.satisfied_block_requests}")
        lines.append(f"  {'Satisfied Weekend Requests':<31} {self.satisfied_weekend_requests}")
        lines.append(f"  {'Adjacent Block-Weekend Pairs':<31} {self.adjacent_pairs}")
        return "\n".join(lines)


def audit(sch: Schedule, inst: ProblemInstance) -> AuditReport:
    """Check the seven hard rules and count satisfied requests and adjacencies.

    Raises IndexError if the schedule names a clinician outside 1..C.
    """
    C, B, S, W = inst.num_clinicians, inst.num_blocks, inst.num_services, inst.num_weekends
    for who in list(sch.block_assignee.values()) + list(sch.weekend_assignee.values()):
        if not 1 <= who <= C:
            raise IndexError(f"clinician id {who} outside 1..{C}")

    bc = [(b, s) for b in inst.blocks for s in inst.services if (b, s) not in sch.block_assignee]
    bc += [k for k in sch.block_assignee if not (1 <= k[0] <= B and 1 <= k[1] <= S)]
    wc = [(w,) for w in inst.weekends if w not in sch.weekend_assignee]
    wc += [(w,) for w in sch.weekend_assignee if not 1 <= w <= W]

    # works[c][s] = set of blocks
    works = {c: {s: set() for s in inst.services} for c in range(1, C + 1)}
    for (b, s), c in sch.block_assignee.items():
        if s in works[c]:
            works[c][s].add(b)

    mm = []
    for c in range(1, C + 1):
        cl = inst.clinicians[c - 1]
        for s in inst.services:
            n = len(works[c][s])
            if not cl.min_blocks[s - 1] <= n <= cl.max_blocks[s - 1]:
                mm.append((c, s, n))

    ncb: list[tuple[int, ...]] = []
    if inst.ncb_mode is not NcbMode.OFF:
        for c in range(1, C + 1):
            hits = set()
            if inst.ncb_mode is NcbMode.PER_SERVICE:
                for s in inst.services:
                    hits |= {b for b in works[c][s] if b + 1 in works[c][s]}
            else:
                # at most one slot over all services in blocks b and b+1
                held = [sum(b in works[c][s] for s in inst.services) for b in range(1, B + 2)]
                hits = {b for b in range(1, B) if held[b - 1] + held[b] > 1}
            ncb += [(c, b) for b in sorted(hits)]

    wk_of = {c: {w for w, who in sch.weekend_assignee.items() if who == c} for c in range(1, C + 1)}
    ncw = [(c, w) for c in range(1, C + 1) for w in sorted(wk_of[c]) if w + 1 in wk_of[c]]

    lo, hi = inst.weekend_bounds()
    ew = [(c, len(wk_of[c])) for c in range(1, C + 1) if not lo <= len(wk_of[c]) <= hi]
    lo, hi = inst.holiday_bounds()
    eh = []
    for c in range(1, C + 1):
        n = len(wk_of[c] & inst.long_weekends)
        if not lo <= n <= hi:
            eh.append((c, n))

    verdicts = {
        "BC": Verdict("BC", tuple(bc)),
        "WC": Verdict("WC", tuple(wc)),
        "MM": Verdict("MM", tuple(mm)),
        "NCB": Verdict("NCB", tuple(ncb)),
        "NCW": Verdict("NCW", tuple(ncw)),
        "EW": Verdict("EW", tuple(ew)),
        "EH": Verdict("EH", tuple(eh)),
    }

    br_num = br_den = wr_num = wr_den = 0
    for c in range(1, C + 1):
        cl = inst.clinicians[c - 1]
        held = set().union(*works[c].values()) if works[c] else set()
        br_den += len(cl.block_requests)
        br_num += sum(1 for b in cl.block_requests if b not in held)
        wr_den += len(cl.weekend_requests)
        wr_num += sum(1 for w in cl.weekend_requests if sch.weekend_assignee.get(w) != c)

    adj = 0
    for b, w in inst.adjacency.pairs:
        on_block = {sch.block_assignee.get((b, s)) for s in inst.services}
        if sch.weekend_assignee.get(w) in on_block:
            adj += 1

    return AuditReport(
        verdicts,
        Ratio(br_num, br_den),
        Ratio(wr_num, wr_den),
        Ratio(adj, len(inst.adjacency)),
    )
