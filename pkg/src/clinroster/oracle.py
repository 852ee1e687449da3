"""Exhaustive reference solver for tiny instances.

Every total assignment is enumerated and screened against the rostering
rules as stated in words (coverage is implicit in a total assignment; the
remaining five rules are checked here).  Nothing is shared with the ILP
formulation, so a modelling slip there cannot hide here.

Block rules and weekend rules touch disjoint halves of an assignment, so the
two halves are screened separately and the objective is evaluated on the
Cartesian product of survivors.  The product is still scanned in full, in
lexicographic order of (block tuple, weekend tuple).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import NcbMode, ProblemInstance
from .validator import Schedule


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    schedule: Schedule | None
    objective: float
    triple: tuple[int, int, int] | None
    candidates: int

    @property
    def status(self) -> str:
        return "optimal" if self.feasible else "infeasible"


def candidate_count(inst: ProblemInstance) -> int:
    C = inst.num_clinicians
    return C ** (inst.num_blocks * inst.num_services) * C ** inst.num_weekends


def _block_ok(assign: tuple[int, ...], inst: ProblemInstance) -> bool:
    B, S = inst.num_blocks, inst.num_services
    # assign[(b-1)*S + (s-1)] = clinician on block b, service s
    for c in range(1, inst.num_clinicians + 1):
        cl = inst.clinicians[c - 1]
        for s in range(S):
            n = sum(1 for b in range(B) if assign[b * S + s] == c)
            if n < cl.min_blocks[s] or n > cl.max_blocks[s]:
                return False
    if inst.ncb_mode is NcbMode.PER_SERVICE:
        for b in range(B - 1):
            for s in range(S):
                if assign[b * S + s] == assign[(b + 1) * S + s]:
                    return False
    elif inst.ncb_mode is NcbMode.CROSS_SERVICE:
        # at most one slot, over all services, in any two consecutive blocks
        for b in range(B - 1):
            pair = assign[b * S:(b + 2) * S]
            if any(pair.count(c) > 1 for c in set(pair)):
                return False
    return True


def _weekend_ok(assign: tuple[int, ...], inst: ProblemInstance) -> bool:
    C, W = inst.num_clinicians, inst.num_weekends
    if any(assign[w] == assign[w + 1] for w in range(W - 1)):
        return False
    lo, hi = W // C, -(-W // C)
    longs = sorted(inst.long_weekends)
    hlo, hhi = len(longs) // C, -(-len(longs) // C)
    for c in range(1, C + 1):
        if not lo <= assign.count(c) <= hi:
            return False
        if not hlo <= sum(1 for w in longs if assign[w - 1] == c) <= hhi:
            return False
    return True


def brute_force(inst: ProblemInstance, limit: int = 10**6) -> OracleResult:
    """Best schedule by full enumeration, or an infeasible result.

    Raises :class:`TooLarge` if C^(B*S) * C^W exceeds ``limit``.
    """
    total = candidate_count(inst)
    if total > limit:
        raise TooLarge(f"{total} candidate schedules exceed the limit {limit}")
    C, B, S, W = inst.num_clinicians, inst.num_blocks, inst.num_services, inst.num_weekends
    clin = range(1, C + 1)

    xs = [a for a in itertools.product(clin, repeat=B * S) if _block_ok(a, inst)]
    ys = [a for a in itertools.product(clin, repeat=W) if _weekend_ok(a, inst)]
    if not xs or not ys:
        return OracleResult(False, None, float("nan"), None, total)

    blk = np.array(xs, dtype=np.int64)  # (nx, B*S)
    wkd = np.array(ys, dtype=np.int64)  # (ny, W)

    # request objectives: +1 per assignment, -1 when it lands on a requested slot
    block_score = np.zeros(len(xs), dtype=np.int64)
    for b in range(B):
        for s in range(S):
            who = blk[:, b * S + s]
            hit = np.array([(b + 1) in inst.clinicians[c - 1].block_requests for c in who])
            block_score += np.where(hit, -1, 1)
    weekend_score = np.zeros(len(ys), dtype=np.int64)
    for w in range(W):
        who = wkd[:, w]
        hit = np.array([(w + 1) in inst.clinicians[c - 1].weekend_requests for c in who])
        weekend_score += np.where(hit, -1, 1)
    adjacency_score = np.zeros((len(xs), len(ys)), dtype=np.int64)
    for b, w in inst.adjacency.pairs:
        for s in range(S):
            adjacency_score += blk[:, (b - 1) * S + s][:, None] == wkd[:, w - 1][None, :]

    w_block, w_weekend, w_pair = inst.weights.as_tuple()
    n_block, n_weekend, n_pair = B * S, W, len(inst.adjacency) * S
    score = (w_block * block_score / n_block)[:, None] + (w_weekend * weekend_score / n_weekend)[None, :]
    if n_pair:
        score = score + w_pair * adjacency_score / n_pair
    k = int(np.argmax(score))  # first maximum in row-major (lexicographic) order
    i, j = divmod(k, len(ys))
    best_x, best_y = xs[i], ys[j]
    sch = Schedule(
        {(b + 1, s + 1): best_x[b * S + s] for b in range(B) for s in range(S)},
        {w + 1: best_y[w] for w in range(W)},
    )
    triple = (int(block_score[i]), int(weekend_score[j]), int(adjacency_score[i, j]))
    return OracleResult(True, sch, float(score[i, j]), triple, total)
