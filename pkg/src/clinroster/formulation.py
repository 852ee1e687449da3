"""Build the rostering 0-1 ILP from a ProblemInstance and decode solutions.

Variables (all 1-based in names):
  blk_c_b_s  clinician c covers service s in block b
  wkd_c_w    clinician c covers weekend w
  adj_c_b_s  linearised blk_c_b_s * wkd_c_w for w the weekend paired with block b;
             only blocks that have a paired weekend get these
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ilpcore import Ilp01, IlpBuilder, IntegralSolution, IPStatus, Sense
from .model import NcbMode, ProblemInstance
from .validator import Schedule

FAMILIES = ("BC", "WC", "MM", "NCB", "NCW", "EW", "EH", "LIN")


class DecodeError(ValueError):
    """A solution vector does not describe exactly one assignee per slot."""


@dataclass(frozen=True)
class VariableLayout:
    num_clinicians: int
    num_blocks: int
    num_services: int
    num_weekends: int
    paired_blocks: tuple[int, ...]

    @classmethod
    def for_instance(cls, inst: ProblemInstance) -> "VariableLayout":
        return cls(inst.num_clinicians, inst.num_blocks, inst.num_services, inst.num_weekends,
                   tuple(sorted(inst.adjacency.domain)))

    @property
    def num_block_vars(self) -> int:
        return self.num_clinicians * self.num_blocks * self.num_services

    @property
    def num_weekend_vars(self) -> int:
        return self.num_clinicians * self.num_weekends

    @property
    def num_pair_vars(self) -> int:
        return self.num_clinicians * len(self.paired_blocks) * self.num_services

    @property
    def num_vars(self) -> int:
        return self.num_block_vars + self.num_weekend_vars + self.num_pair_vars

    def block_var(self, c: int, b: int, s: int) -> int:
        return ((c - 1) * self.num_blocks + (b - 1)) * self.num_services + (s - 1)

    def weekend_var(self, c: int, w: int) -> int:
        return self.num_block_vars + (c - 1) * self.num_weekends + (w - 1)

    def pair_var(self, c: int, b: int, s: int) -> int:
        k = self._pair_pos[b]
        base = self.num_block_vars + self.num_weekend_vars
        return base + ((c - 1) * len(self.paired_blocks) + k) * self.num_services + (s - 1)

    @property
    def _pair_pos(self) -> dict[int, int]:
        pos = self.__dict__.get("_zp")
        if pos is None:
            pos = {b: k for k, b in enumerate(self.paired_blocks)}
            object.__setattr__(self, "_zp", pos)
        return pos


@dataclass(frozen=True)
class ObjectiveBreakdown:
    block_score: int
    weekend_score: int
    adjacency_score: int
    block_norm: float
    weekend_norm: float
    adjacency_norm: float
    weighted: float

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.block_score, self.weekend_score, self.adjacency_score)


def normalizers(inst: ProblemInstance) -> tuple[int, int, int]:
    """Divisors mapping each request/adjacency objective onto [-1, 1].

    The adjacency count sums over services, so one clinician holding every
    service of a block next to their weekend scores S for that block; the
    divisor is S times the number of paired blocks, not the paired-block count alone.
    """
    S = inst.num_services
    return inst.num_blocks * S, inst.num_weekends, len(inst.adjacency) * S


def weighted_objective(inst: ProblemInstance, block_score: int, weekend_score: int, adjacency_score: int) -> float:
    w_block, w_weekend, w_pair = inst.weights.as_tuple()
    n_block, n_weekend, n_pair = normalizers(inst)
    total = w_block * block_score / n_block + w_weekend * weekend_score / n_weekend
    return total + (w_pair * adjacency_score / n_pair if n_pair else 0.0)


def build(inst: ProblemInstance) -> tuple[Ilp01, VariableLayout]:
    """Emit every constraint family and the weighted objective as an Ilp01."""
    L = VariableLayout.for_instance(inst)
    C, B, S, W = inst.num_clinicians, inst.num_blocks, inst.num_services, inst.num_weekends
    cl = range(1, C + 1)
    bl = range(1, B + 1)
    sv = range(1, S + 1)
    wk = range(1, W + 1)
    adjacent = inst.adjacency.as_dict()

    ilp = IlpBuilder()
    for c in cl:
        for b in bl:
            for s in sv:
                ilp.add_var(f"blk_{c}_{b}_{s}")
    for c in cl:
        for w in wk:
            ilp.add_var(f"wkd_{c}_{w}")
    for c in cl:
        for b in L.paired_blocks:
            for s in sv:
                ilp.add_var(f"adj_{c}_{b}_{s}")
    assert len(ilp.var_names) == L.num_vars

    for b in bl:
        for s in sv:
            ilp.add_row([(L.block_var(c, b, s), 1) for c in cl], Sense.EQ, 1, f"BC_b{b}_s{s}")
    for w in wk:
        ilp.add_row([(L.weekend_var(c, w), 1) for c in cl], Sense.EQ, 1, f"WC_w{w}")
    for c in cl:
        cln = inst.clinicians[c - 1]
        for s in sv:
            row = [(L.block_var(c, b, s), 1) for b in bl]
            ilp.add_row(row, Sense.GE, cln.min_blocks[s - 1], f"MM_min_c{c}_s{s}")
            ilp.add_row(row, Sense.LE, cln.max_blocks[s - 1], f"MM_max_c{c}_s{s}")
    if inst.ncb_mode is NcbMode.PER_SERVICE:
        for c in cl:
            for b in bl[:-1]:
                for s in sv:
                    row = [(L.block_var(c, b, s), 1), (L.block_var(c, b + 1, s), 1)]
                    ilp.add_row(row, Sense.LE, 1, f"NCB_c{c}_b{b}_s{s}")
    elif inst.ncb_mode is NcbMode.CROSS_SERVICE:
        for c in cl:
            for b in bl[:-1]:
                row = [(L.block_var(c, b, s), 1) for s in sv] + [(L.block_var(c, b + 1, s), 1) for s in sv]
                ilp.add_row(row, Sense.LE, 1, f"NCB_c{c}_b{b}")
    for c in cl:
        for w in wk[:-1]:
            ilp.add_row([(L.weekend_var(c, w), 1), (L.weekend_var(c, w + 1), 1)], Sense.LE, 1, f"NCW_c{c}_w{w}")
    lo, hi = inst.weekend_bounds()
    for c in cl:
        row = [(L.weekend_var(c, w), 1) for w in wk]
        ilp.add_row(row, Sense.GE, lo, f"EW_min_c{c}")
        ilp.add_row(row, Sense.LE, hi, f"EW_max_c{c}")
    lo, hi = inst.holiday_bounds()
    longs = sorted(inst.long_weekends)
    for c in cl:
        row = [(L.weekend_var(c, w), 1) for w in longs]
        ilp.add_row(row, Sense.GE, lo, f"EH_min_c{c}")
        ilp.add_row(row, Sense.LE, hi, f"EH_max_c{c}")
    for c in cl:
        for b in L.paired_blocks:
            for s in sv:
                z = L.pair_var(c, b, s)
                ilp.add_row([(z, 1), (L.block_var(c, b, s), -1)], Sense.LE, 0, f"LINB_c{c}_b{b}_s{s}")
                ilp.add_row([(z, 1), (L.weekend_var(c, adjacent[b]), -1)], Sense.LE, 0, f"LINW_c{c}_b{b}_s{s}")

    w_block, w_weekend, w_pair = inst.weights.as_tuple()
    n_block, n_weekend, n_pair = normalizers(inst)
    for c in cl:
        req_b = inst.clinicians[c - 1].block_requests
        req_w = inst.clinicians[c - 1].weekend_requests
        for b in bl:
            sign = -1.0 if b in req_b else 1.0
            for s in sv:
                ilp.set_objective(L.block_var(c, b, s), w_block * sign / n_block)
        for w in wk:
            ilp.set_objective(L.weekend_var(c, w), w_weekend * (-1.0 if w in req_w else 1.0) / n_weekend)
        for b in L.paired_blocks:
            for s in sv:
                ilp.set_objective(L.pair_var(c, b, s), w_pair / n_pair)
    return ilp.build(), L


def family_counts(p: Ilp01) -> dict[str, int]:
    """Number of emitted rows per constraint family (by row-name prefix)."""
    out = dict.fromkeys(FAMILIES, 0)
    for nm in p.row_names:
        fam = nm.split("_", 1)[0]
        out["LIN" if fam.startswith("LIN") else fam] += 1
    return out


def decode(layout: VariableLayout, sol: "IntegralSolution | Sequence[int] | np.ndarray",
           inst: ProblemInstance | None = None) -> Schedule:
    """Read block and weekend assignees off a 0/1 vector."""
    if isinstance(sol, IntegralSolution):
        if sol.values is None:
            raise DecodeError(f"solution has no values (status {sol.status.value})")
        values = sol.values
    else:
        values = sol
    v = np.rint(np.asarray(values, dtype=float)).astype(np.int64)
    if v.shape != (layout.num_vars,):
        raise DecodeError(f"expected {layout.num_vars} values, got {v.shape}")
    C, B, S, W = layout.num_clinicians, layout.num_blocks, layout.num_services, layout.num_weekends
    blk = v[: layout.num_block_vars].reshape(C, B, S)
    wkd = v[layout.num_block_vars: layout.num_block_vars + layout.num_weekend_vars].reshape(C, W)
    blocks: dict[tuple[int, int], int] = {}
    for b in range(B):
        for s in range(S):
            who = np.flatnonzero(blk[:, b, s])
            if who.size != 1:
                raise DecodeError(f"block {b + 1} service {s + 1} has {who.size} assignees")
            blocks[(b + 1, s + 1)] = int(who[0]) + 1
    weekends: dict[int, int] = {}
    for w in range(W):
        who = np.flatnonzero(wkd[:, w])
        if who.size != 1:
            raise DecodeError(f"weekend {w + 1} has {who.size} assignees")
        weekends[w + 1] = int(who[0]) + 1
    return Schedule(blocks, weekends)


def encode(layout: VariableLayout, sch: Schedule, inst: ProblemInstance) -> np.ndarray:
    """0/1 vector of a schedule, with each pairing variable set to the product it linearises."""
    v = np.zeros(layout.num_vars, dtype=np.int8)
    for (b, s), c in sch.block_assignee.items():
        v[layout.block_var(c, b, s)] = 1
    for w, c in sch.weekend_assignee.items():
        v[layout.weekend_var(c, w)] = 1
    adjacent = inst.adjacency.as_dict()
    for c in range(1, layout.num_clinicians + 1):
        for b in layout.paired_blocks:
            for s in range(1, layout.num_services + 1):
                v[layout.pair_var(c, b, s)] = v[layout.block_var(c, b, s)] & v[layout.weekend_var(c, adjacent[b])]
    return v


def objective_breakdown(layout: VariableLayout, values, inst: ProblemInstance) -> ObjectiveBreakdown:
    """Request and adjacency objectives recomputed from the block and weekend variables alone.

    The adjacency count ignores the pairing entries in ``values`` and takes
    min(block, paired weekend) instead.
    """
    v = np.rint(np.asarray(values, dtype=float)).astype(np.int64)
    C, B, S, W = layout.num_clinicians, layout.num_blocks, layout.num_services, layout.num_weekends
    blk = v[: layout.num_block_vars].reshape(C, B, S)
    wkd = v[layout.num_block_vars: layout.num_block_vars + layout.num_weekend_vars].reshape(C, W)
    block_score = weekend_score = adjacency_score = 0
    adjacent = inst.adjacency.as_dict()
    for c in range(C):
        cl = inst.clinicians[c]
        for b in range(B):
            n = int(blk[c, b].sum())
            block_score += -n if (b + 1) in cl.block_requests else n
            w = adjacent.get(b + 1)
            if w is not None:
                adjacency_score += int(np.minimum(blk[c, b], wkd[c, w - 1]).sum())
        for w in range(W):
            weekend_score += -int(wkd[c, w]) if (w + 1) in cl.weekend_requests else int(wkd[c, w])
    n_block, n_weekend, n_pair = normalizers(inst)
    w_block, w_weekend, w_pair = inst.weights.as_tuple()
    return ObjectiveBreakdown(
        block_score, weekend_score, adjacency_score,
        block_score / n_block, weekend_score / n_weekend, adjacency_score / n_pair if n_pair else 0.0,
        weighted_objective(inst, block_score, weekend_score, adjacency_score),
    )


def is_solved(sol: IntegralSolution) -> bool:
    return sol.status is IPStatus.OPTIMAL or (sol.status is IPStatus.TIMED_OUT and sol.values is not None)
