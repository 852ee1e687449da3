"""LP-based branch-and-bound for :class:`Ilp01` problems."""

from __future__ import annotations

import enum
import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .config import BranchingRule, NodeOrder, SolverConfig
from .problem import Ilp01, IlpBuilder, Row, Sense, check_feasible
from .simplex import Basis, LPStatus, LPTimeout, RelaxedSolution, solve_relaxation

log = logging.getLogger(__name__)


class IPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timed-out"


@dataclass(frozen=True)
class IntegralSolution:
    status: IPStatus
    values: np.ndarray | None
    objective: float
    node_count: int
    wall_time: float
    best_bound: float
    root_bound: float
    lp_iterations: int = 0
    bound_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None

    @property
    def gap(self) -> float:
        if self.values is None:
            return math.inf
        return max(0.0, self.best_bound - self.objective)


# Called with the problem and its root relaxation; returns extra rows valid for
# every 0/1 point.  Rows are appended and the root is re-solved.  This is where
# cutting-plane separation slots in.
CutGenerator = Callable[[Ilp01, RelaxedSolution], Sequence[Row]]


def objective_lattice(objective: np.ndarray, max_den: int = 1_000_000) -> float | None:
    """Largest g such that every objective coefficient is an integer multiple of g.

    Returns ``None`` when the coefficients are not (close to) small rationals
    or the lattice step is below 1e-6.
    Any 0/1 objective value then lies on the lattice g*Z, which sharpens pruning.
    """
    nz = [float(c) for c in np.unique(objective[objective != 0])]
    if not nz:
        return None
    fracs = []
    for c in nz:
        f = Fraction(c).limit_denominator(max_den)
        if abs(float(f) - c) > 1e-12 * max(1.0, abs(c)):
            return None
        fracs.append(abs(f))
    num = 0
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    for f in fracs:
        num = math.gcd(num, f.numerator * (den // f.denominator))
    g = Fraction(num, den)
    # a very fine lattice gains nothing over the plain tolerance test
    return float(g) if g >= Fraction(1, 10**6) else None


@dataclass
class _Node:
    fixings: dict[int, int]
    lp: RelaxedSolution
    depth: int


class _Search:
    def __init__(self, p: Ilp01, cfg: SolverConfig):
        self.p = p
        self.cfg = cfg
        self.start = time.monotonic()
        self.deadline = None if cfg.time_limit is None else self.start + cfg.time_limit
        self.lattice = objective_lattice(p.objective)
        self.incumbent: np.ndarray | None = None
        self.incumbent_obj = -math.inf
        self.node_count = 0
        self.lp_iterations = 0
        self.open: list = []
        self.seq = 0
        self.trace: list[float] = []
        self.rhs = np.asarray(p.rhs, dtype=float)
        self.le_rows = np.array([s is not Sense.GE for s in p.senses], dtype=bool)
        self.ge_rows = np.array([s is not Sense.LE for s in p.senses], dtype=bool)

    # ---------------------------------------------------------------- helpers
    def _solve(self, fixings: dict[int, int], warm: Basis | None) -> RelaxedSolution:
        self.node_count += 1
        return self._solve_lp(fixings, warm)

    def _solve_lp(self, fixings: dict[int, int], warm: Basis | None) -> RelaxedSolution:
        res = solve_relaxation(
            self.p,
            self.cfg,
            sorted(fixings.items()),
            warm_start=warm if self.cfg.warm_start else None,
            deadline=self.deadline,
        )
        self.lp_iterations += res.iterations
        return res

    def _can_prune(self, bound: float) -> bool:
        if self.incumbent is None:
            return False
        if self.lattice is not None:
            kb = math.floor(bound / self.lattice + 1e-4)
            ki = round(self.incumbent_obj / self.lattice)
            return kb <= ki
        return bound <= self.incumbent_obj + 1e-9 * max(1.0, abs(self.incumbent_obj))

    def _branch_var(self, vals: np.ndarray, fixings: dict[int, int]) -> int:
        frac = np.abs(vals - np.round(vals))
        if fixings:
            frac[list(fixings)] = 0.0
        if self.cfg.branching is BranchingRule.FIRST_FRACTIONAL:
            cand = np.flatnonzero(frac > self.cfg.int_tol)
            return int(cand[0]) if cand.size else -1
        j = int(np.argmax(frac))
        return j if frac[j] > self.cfg.int_tol else -1

    def _try_incumbent(self, vals: np.ndarray, fixings: dict[int, int]) -> int:
        """Accept an integral LP point as incumbent.  Returns a branch variable otherwise."""
        j = self._branch_var(vals, fixings)
        if j >= 0:
            self._try_rounding(vals)
            return j
        snapped = np.round(vals).astype(np.int8)
        if not check_feasible(self.p, snapped.tolist()):
            # numerically integral but violates a row exactly: branch on the
            # least-integral free variable instead
            frac = np.abs(vals - snapped)
            if fixings:
                frac[list(fixings)] = -1.0
            j = int(np.argmax(frac))
            return j if frac[j] >= 0 else -2
        obj = math.fsum(self.p.objective[snapped == 1].tolist())
        if obj > self.incumbent_obj:
            self.incumbent = snapped
            self.incumbent_obj = obj
            log.debug("incumbent %.9f at node %d", obj, self.node_count)
        return -1

    def _try_rounding(self, vals: np.ndarray) -> None:
        """Offer the nearest 0/1 point as incumbent if it is feasible.

        Catches nodes whose only fractional entries do not matter, e.g. a
        zero-cost variable left between two integral neighbours.
        """
        snapped = np.round(vals).astype(np.int8)
        act = self.p.matrix @ snapped.astype(float)
        rhs = self.rhs
        if np.any(self.le_rows & (act > rhs + 0.5)) or np.any(self.ge_rows & (act < rhs - 0.5)):
            return
        if not check_feasible(self.p, snapped.tolist()):
            return
        obj = math.fsum(self.p.objective[snapped == 1].tolist())
        if obj > self.incumbent_obj:
            self.incumbent = snapped
            self.incumbent_obj = obj
            log.debug("incumbent %.9f by rounding at node %d", obj, self.node_count)

    def _push(self, node: _Node) -> None:
        self.seq += 1
        if self.cfg.node_order is NodeOrder.DEPTH_FIRST:
            self.open.append(node)
        else:
            heapq.heappush(self.open, (-node.lp.objective, -node.depth, self.seq, node))

    def _pop(self) -> _Node:
        if self.cfg.node_order is NodeOrder.DEPTH_FIRST:
            return self.open.pop()
        return heapq.heappop(self.open)[-1]

    def _open_bound(self) -> float:
        if not self.open:
            return -math.inf
        if self.cfg.node_order is NodeOrder.DEPTH_FIRST:
            return max(n.lp.objective for n in self.open)
        return -self.open[0][0]

    def _record_bound(self) -> None:
        self.trace.append(max(self._open_bound(), self.incumbent_obj))

    # -------------------------------------------------------------- heuristic
    def _dive(self, root: RelaxedSolution) -> None:
        """Fix-and-resolve dive from the root relaxation, looking for an incumbent.

        Each round fixes to 1 every free variable already at 1 plus a batch of
        fractional ones (largest value first) whose joint fixing passes a row
        activity check, then re-solves warm.  Batches shrink until one keeps
        the bound; failing that, single fixings of the leading candidates are
        tried, and only then is the bound allowed to drop.  The
        dive never prunes or fathoms search nodes, so exactness is unaffected.
        """
        p, tol = self.p, self.cfg.int_tol
        A = p.matrix.tocsc()
        le = np.array([s is not Sense.GE for s in p.senses])
        ge = np.array([s is not Sense.LE for s in p.senses])
        rhs = np.asarray(p.rhs, dtype=float)
        pos, neg = A.maximum(0).tocsr(), A.minimum(0).tocsr()
        fix: dict[int, int] = {}
        lp = root
        for _ in range(p.num_vars):
            vals = lp.values
            free = np.ones(p.num_vars, dtype=bool)
            free[list(fix)] = False
            frac = np.flatnonzero(free & (np.abs(vals - np.round(vals)) > tol))
            if frac.size == 0:
                self._try_incumbent(vals, fix)
                return
            # row activity range under current fixings
            lo = np.zeros(p.num_vars)
            hi = np.ones(p.num_vars)
            for j, v in fix.items():
                lo[j] = hi[j] = v
            minact = pos @ lo + neg @ hi
            maxact = pos @ hi + neg @ lo

            def fits(j: int) -> bool:
                rows = A.indices[A.indptr[j]:A.indptr[j + 1]]
                a = A.data[A.indptr[j]:A.indptr[j + 1]]
                new_min = minact[rows] + np.maximum(a, 0)
                new_max = maxact[rows] + np.minimum(a, 0)
                return bool(np.all(~le[rows] | (new_min <= rhs[rows] + 1e-9))
                            and np.all(~ge[rows] | (new_max >= rhs[rows] - 1e-9)))

            def take(j: int) -> None:
                rows = A.indices[A.indptr[j]:A.indptr[j + 1]]
                a = A.data[A.indptr[j]:A.indptr[j + 1]]
                minact[rows] += np.maximum(a, 0)
                maxact[rows] += np.minimum(a, 0)

            batch = {}
            for j in np.flatnonzero(free & (vals >= 1 - tol)):
                if fits(int(j)):
                    take(int(j))
                    batch[int(j)] = 1
            order = frac[np.lexsort((frac, -vals[frac]))]
            top = int(order[0])
            picked = []
            for j in order:
                j = int(j)
                if picked and vals[j] < 0.5:
                    break
                if fits(j):
                    take(j)
                    picked.append(j)
            # shrinking batches that must keep the bound, then single fixings
            attempts, k = [], len(picked)
            while k >= 1:
                attempts.append(({**fix, **batch, **dict.fromkeys(picked[:k], 1)}, True))
                k //= 4
            # single fixings of the leading candidates, either way, still keeping the bound
            lead = [int(j) for j in order[:3]]
            attempts += [({**fix, **batch, j: 1}, True) for j in lead]
            attempts += [({**fix, j: 0}, True) for j in lead]
            attempts += [({**fix, **batch, top: 1}, False), ({**fix, top: 0}, False)]
            for trial, keep_bound in attempts:
                res = self._solve_lp(trial, lp.basis)
                ok = res.status is LPStatus.OPTIMAL and not self._can_prune(res.objective)
                if ok and keep_bound:
                    ok = res.objective >= lp.objective - 1e-9 * max(1.0, abs(lp.objective))
                log.debug("dive: %d fixed, %d fractional, trial %d -> %s %.6f", len(fix), frac.size,
                          len(trial), res.status.value, res.objective)
                if ok:
                    fix, lp = trial, res
                    break
            else:
                log.debug("dive abandoned with %d fixings", len(fix))
                return

    # ------------------------------------------------------------------ main
    def _evaluate(self, fixings: dict[int, int], depth: int, warm: Basis | None) -> None:
        res = self._solve(fixings, warm)
        if res.status is LPStatus.INFEASIBLE:
            return
        if res.status is LPStatus.UNBOUNDED:  # impossible with boxed variables
            raise RuntimeError("LP relaxation of a 0-1 problem reported unbounded")
        if self._can_prune(res.objective):
            return
        j = self._try_incumbent(res.values, fixings)
        if j >= 0:
            self._push(_Node(fixings, res, depth))

    def run(self, root: RelaxedSolution | None = None) -> IntegralSolution:
        root_bound = math.nan
        try:
            if root is None:
                root = self._solve({}, None)
            else:
                self.node_count += 1
                self.lp_iterations += root.iterations
            root_bound = root.objective if root.status is LPStatus.OPTIMAL else -math.inf
            if root.status is LPStatus.OPTIMAL:
                j = self._try_incumbent(root.values, {})
                if j >= 0:
                    if self.cfg.dive:
                        self._dive(root)
                    if not self._can_prune(root.objective):
                        self._push(_Node({}, root, 0))
            self._record_bound()
            while self.open:
                if self.deadline is not None and time.monotonic() > self.deadline:
                    raise LPTimeout()
                if self.cfg.max_nodes is not None and self.node_count >= self.cfg.max_nodes:
                    raise LPTimeout()
                node = self._pop()
                if self._can_prune(node.lp.objective):
                    self._record_bound()
                    continue
                j = self._branch_var(node.lp.values, node.fixings)
                if j < 0:  # exact-check fallback path
                    j = self._try_incumbent(node.lp.values, node.fixings)
                    if j < 0:
                        self._record_bound()
                        continue
                up = node.lp.values[j] >= 0.5
                first, second = (1, 0) if up else (0, 1)
                # depth-first pops the last pushed child, so push the preferred one last
                order = (second, first) if self.cfg.node_order is NodeOrder.DEPTH_FIRST else (first, second)
                for v in order:
                    self._evaluate({**node.fixings, j: v}, node.depth + 1, node.lp.basis)
                self._record_bound()
        except LPTimeout:
            bound = max(self._open_bound(), self.incumbent_obj)
            if not self.trace:
                bound = root_bound if math.isfinite(root_bound) else math.inf
            return IntegralSolution(
                IPStatus.TIMED_OUT,
                self.incumbent,
                self.incumbent_obj if self.incumbent is not None else math.nan,
                self.node_count,
                time.monotonic() - self.start,
                bound,
                root_bound,
                self.lp_iterations,
                tuple(self.trace),
            )
        wall = time.monotonic() - self.start
        if self.incumbent is None:
            return IntegralSolution(IPStatus.INFEASIBLE, None, math.nan, self.node_count, wall,
                                    -math.inf, root_bound, self.lp_iterations, tuple(self.trace))
        return IntegralSolution(IPStatus.OPTIMAL, self.incumbent, self.incumbent_obj, self.node_count,
                                wall, self.incumbent_obj, root_bound, self.lp_iterations, tuple(self.trace))


def _with_rows(p: Ilp01, rows: Sequence[Row]) -> Ilp01:
    b = IlpBuilder()
    for nm in p.var_names:
        b.add_var(nm)
    for r in p.rows():
        b.add_row(r.coeffs, r.sense, r.rhs, r.name)
    for k, r in enumerate(rows):
        b.add_row(r.coeffs, r.sense, r.rhs, r.name or f"cut{k}")
    for j in np.flatnonzero(p.objective):
        b.set_objective(int(j), float(p.objective[j]))
    return b.build()


def branch_and_bound(
    p: Ilp01,
    cfg: SolverConfig | None = None,
    cut_generator: CutGenerator | None = None,
    max_cut_rounds: int = 5,
) -> IntegralSolution:
    """Maximise over 0/1 points of ``p`` exactly.

    Nodes are LP relaxations with some variables fixed; the search branches on
    the most fractional variable (lowest index on ties).  The result is
    deterministic for a given ``(p, cfg)``.  If ``cut_generator`` is given, its
    rows are added at the root for up to ``max_cut_rounds`` rounds before
    branching starts.
    """
    cfg = cfg or SolverConfig()
    if cut_generator is None:
        return _Search(p, cfg).run()
    start = time.monotonic()
    work = p
    root = None
    for _ in range(max_cut_rounds):
        root = solve_relaxation(work, cfg)
        if root.status is not LPStatus.OPTIMAL:
            break
        cuts = list(cut_generator(work, root))
        if not cuts:
            break
        work = _with_rows(work, cuts)
        root = None
    search = _Search(work, cfg)
    search.start = start
    return search.run(root)
