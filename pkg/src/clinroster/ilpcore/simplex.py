"""Bounded-variable revised simplex for the LP relaxation of an :class:`Ilp01`.

Every row ``a.x (sense) b`` gets a logical (slack) column so the working form is
``[A | I] (x, s) = b`` with box bounds on ``x`` and sign bounds on ``s``.  The
basis is held as a sparse LU factorization plus a product-form eta file that
is rebuilt every ``SolverConfig.refactor_interval`` pivots.

Phase 1 minimises the sum of bound violations of the basic variables
(composite phase 1: no artificial columns), which also lets the method restart
from any basis.  The dual method re-optimises after bound changes (e.g. a
branch-and-bound child inheriting its parent's optimal basis).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .config import SolverConfig
from .problem import Ilp01, Sense


class NumericalInstability(RuntimeError):
    """Pivot magnitudes or residuals fell outside the configured thresholds."""


class LPTimeout(Exception):
    """Raised internally when a deadline passes mid-solve."""


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


# nonbasic position codes
_BASIC, _AT_LOWER, _AT_UPPER = 0, -1, 1


@dataclass(frozen=True)
class Basis:
    """A simplex basis: basic column per row plus the nonbasic bound flags."""

    head: tuple[int, ...]
    at_upper: frozenset[int]


@dataclass(frozen=True)
class RelaxedSolution:
    status: LPStatus
    values: np.ndarray | None
    objective: float
    iterations: int = 0
    basis: Basis | None = None


@dataclass(frozen=True, eq=False)
class _LPData:
    """Column-augmented form of an Ilp01, shared by every solve of that problem."""

    K: sp.csc_matrix
    KT: sp.csr_matrix
    b: np.ndarray
    cost: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    n: int
    m: int


def lp_data(p: Ilp01) -> _LPData:
    cached = p.__dict__.get("_lp_data")
    if cached is not None:
        return cached
    m, n = p.num_rows, p.num_vars
    K = sp.hstack([p.matrix.tocsc(), sp.identity(m, format="csc")], format="csc")
    K.sort_indices()
    slack_lb = np.zeros(m)
    slack_ub = np.zeros(m)
    for i, s in enumerate(p.senses):
        if s is Sense.LE:
            slack_ub[i] = np.inf
        elif s is Sense.GE:
            slack_lb[i] = -np.inf
    data = _LPData(
        K=K,
        KT=K.T.tocsr(),
        b=np.asarray(p.rhs, dtype=float),
        cost=np.concatenate([np.asarray(p.objective, dtype=float), np.zeros(m)]),
        lb=np.concatenate([np.zeros(n), slack_lb]),
        ub=np.concatenate([np.ones(n), slack_ub]),
        n=n,
        m=m,
    )
    p.__dict__["_lp_data"] = data
    return data


@numba.njit(cache=True)
def _eta_ftran(v, rows, pivs, starts, idx, vals, k):
    for e in range(k):
        r = rows[e]
        vr = v[r] / pivs[e]
        if vr != 0.0:
            for p in range(starts[e], starts[e + 1]):
                v[idx[p]] -= vr * vals[p]
        v[r] = vr


@numba.njit(cache=True)
def _eta_btran(y, rows, pivs, starts, idx, vals, k):
    for e in range(k - 1, -1, -1):
        r = rows[e]
        acc = y[r]
        for p in range(starts[e], starts[e + 1]):
            acc -= vals[p] * y[idx[p]]
        y[r] = acc / pivs[e]


class _Factor:
    """LU of the basis matrix with product-form (eta file) updates."""

    def __init__(self, K: sp.csc_matrix, head: np.ndarray, pivot_tol: float, capacity: int):
        self.m = len(head)
        self.pivot_tol = pivot_tol
        Bm = K[:, head].tocsc()
        try:
            self.lu = spla.splu(Bm, permc_spec="COLAMD")
        except RuntimeError as exc:  # exactly singular
            raise NumericalInstability(f"singular basis: {exc}") from None
        self.k = 0
        self.rows = np.zeros(capacity + 1, dtype=np.int64)
        self.pivs = np.ones(capacity + 1)
        self.starts = np.zeros(capacity + 2, dtype=np.int64)
        self.idx = np.zeros(4 * self.m + 16, dtype=np.int64)
        self.vals = np.zeros(4 * self.m + 16)

    def ftran(self, a: np.ndarray) -> np.ndarray:
        v = self.lu.solve(a)
        if self.k:
            _eta_ftran(v, self.rows, self.pivs, self.starts, self.idx, self.vals, self.k)
        return v

    def btran(self, c: np.ndarray) -> np.ndarray:
        y = np.array(c, dtype=float)
        if self.k:
            _eta_btran(y, self.rows, self.pivs, self.starts, self.idx, self.vals, self.k)
        return self.lu.solve(y, trans="T")

    def update(self, r: int, alpha: np.ndarray) -> None:
        piv = alpha[r]
        if abs(piv) < self.pivot_tol:
            raise NumericalInstability(f"pivot {piv:.3e} below threshold {self.pivot_tol:.1e}")
        if self.k + 1 >= len(self.rows):
            grow = len(self.rows)
            self.rows = np.concatenate([self.rows, np.zeros(grow, dtype=np.int64)])
            self.pivs = np.concatenate([self.pivs, np.ones(grow)])
            self.starts = np.concatenate([self.starts, np.zeros(grow, dtype=np.int64)])
        nz = np.flatnonzero(alpha)
        nz = nz[nz != r]
        lo = self.starts[self.k]
        hi = lo + nz.size
        if hi > self.idx.size:
            extra = max(hi - self.idx.size, self.idx.size)
            self.idx = np.concatenate([self.idx, np.zeros(extra, dtype=np.int64)])
            self.vals = np.concatenate([self.vals, np.zeros(extra)])
        self.idx[lo:hi] = nz
        self.vals[lo:hi] = alpha[nz]
        self.rows[self.k] = r
        self.pivs[self.k] = piv
        self.k += 1
        self.starts[self.k] = hi


class BoundedSimplex:
    """State for one LP solve; construct, then call :meth:`primal` or :meth:`dual`."""

    def __init__(
        self,
        data: _LPData,
        cfg: SolverConfig,
        lb: np.ndarray | None = None,
        ub: np.ndarray | None = None,
        basis: Basis | None = None,
        deadline: float | None = None,
    ):
        self.d = data
        self.cfg = cfg
        self.deadline = deadline
        self.lb = data.lb if lb is None else lb
        self.ub = data.ub if ub is None else ub
        n, m = data.n, data.m
        N = n + m
        self.state = np.full(N, _AT_LOWER, dtype=np.int8)
        if basis is not None:
            head = np.asarray(basis.head, dtype=np.int64)
            for j in basis.at_upper:
                self.state[j] = _AT_UPPER
        else:
            head = np.arange(n, n + m, dtype=np.int64)
        self.state[head] = _BASIC
        # a nonbasic variable must sit at a finite bound
        upper_ok = np.isfinite(self.ub)
        lower_ok = np.isfinite(self.lb)
        self.state[(self.state == _AT_UPPER) & ~upper_ok] = _AT_LOWER
        self.state[(self.state == _AT_LOWER) & ~lower_ok] = _AT_UPPER
        self.head = head
        self.iterations = 0
        self.x = np.zeros(N)
        self._refactor()

    # ------------------------------------------------------------------ basics
    def _nonbasic_values(self) -> None:
        x = self.x
        low = self.state == _AT_LOWER
        up = self.state == _AT_UPPER
        x[low] = self.lb[low]
        x[up] = self.ub[up]

    def _refactor(self) -> None:
        self.factor = _Factor(self.d.K, self.head, self.cfg.pivot_tol, self.cfg.refactor_interval)
        self._nonbasic_values()
        self.x[self.head] = 0.0
        resid = self.d.b - self.d.K @ self.x
        self.x[self.head] = self.factor.ftran(resid)

    def _column(self, j: int) -> np.ndarray:
        K = self.d.K
        a = np.zeros(self.d.m)
        lo, hi = K.indptr[j], K.indptr[j + 1]
        a[K.indices[lo:hi]] = K.data[lo:hi]
        return a

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise LPTimeout()

    # ------------------------------------------------------------------- solve
    def primal(self) -> RelaxedSolution:
        cfg = self.cfg
        n = self.d.n
        tol = cfg.feas_tol
        dtol = cfg.opt_tol
        max_iter = cfg.max_lp_iterations or 50 * (self.d.n + self.d.m) + 1000
        degenerate_streak = 0
        pivots_since_refactor = 0
        verified = False
        lb, ub, head, state, x = self.lb, self.ub, self.head, self.state, self.x
        movable = ub > lb

        while True:
            if self.iterations >= max_iter:
                raise NumericalInstability(f"simplex iteration limit {max_iter} reached")
            if self.iterations % 64 == 0:
                self._check_deadline()
            if pivots_since_refactor >= cfg.refactor_interval:
                self._refactor()
                pivots_since_refactor = 0

            xB = x[head]
            lbB, ubB = lb[head], ub[head]
            below = xB < lbB - tol
            above = xB > ubB + tol
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = below.astype(float) - above.astype(float)
                y = self.factor.btran(cB)
                d = -(self.d.KT @ y)
            else:
                y = self.factor.btran(self.d.cost[head])
                d = self.d.cost - self.d.KT @ y

            score = np.where((state == _AT_LOWER) & movable & (d > dtol), d, 0.0)
            score = np.where((state == _AT_UPPER) & movable & (d < -dtol), -d, score)
            bland = degenerate_streak >= cfg.degenerate_streak
            if bland:
                cand = np.flatnonzero(score > 0.0)
                q = int(cand[0]) if cand.size else -1
            else:
                q = int(np.argmax(score))
                if score[q] <= 0.0:
                    q = -1

            if q < 0:
                if phase1:
                    if pivots_since_refactor == 0 or verified:
                        return RelaxedSolution(LPStatus.INFEASIBLE, None, float("nan"), self.iterations)
                    self._refactor()
                    pivots_since_refactor = 0
                    verified = True
                    continue
                # confirm on a fresh factorization before declaring optimality
                if pivots_since_refactor and not verified:
                    self._refactor()
                    pivots_since_refactor = 0
                    verified = True
                    continue
                return self._finish()
            verified = False

            direction = 1.0 if state[q] == _AT_LOWER else -1.0
            alpha = self.factor.ftran(self._column(q))
            delta = -direction * alpha  # d x_B / dt
            r, t, target = self._ratio_test(xB, lbB, ubB, delta, below, above, bland)
            flip = ub[q] - lb[q]
            if r < 0 and not np.isfinite(flip):
                if phase1:
                    raise NumericalInstability("unbounded ray during phase 1")
                return RelaxedSolution(LPStatus.UNBOUNDED, None, float("inf"), self.iterations)

            self.iterations += 1
            if r < 0 or flip <= t:
                # entering variable reaches its opposite bound first
                x[head] = xB + flip * delta
                state[q] = _AT_UPPER if state[q] == _AT_LOWER else _AT_LOWER
                x[q] = ub[q] if state[q] == _AT_UPPER else lb[q]
                degenerate_streak = 0
                continue

            degenerate_streak = degenerate_streak + 1 if t <= 1e-12 else 0
            x[head] = xB + t * delta
            x[q] += direction * t
            leaving = int(head[r])
            x[leaving] = target
            state[leaving] = _AT_UPPER if target == ub[leaving] and target != lb[leaving] else _AT_LOWER
            state[q] = _BASIC
            head[r] = q
            self.factor.update(r, alpha)
            pivots_since_refactor += 1

    def dual(self) -> RelaxedSolution | None:
        """Dual simplex from the current basis with dual steepest-edge pricing.

        Returns ``None`` when the starting basis cannot be made dual feasible
        by bound flips (the caller then falls back to :meth:`primal`).  Works
        on the minimisation of ``-cost``.
        """
        cfg = self.cfg
        tol, dtol, ptol = cfg.feas_tol, cfg.opt_tol, cfg.ratio_pivot_tol
        lb, ub, state, x = self.lb, self.ub, self.state, self.x
        head = self.head
        cmin = -self.d.cost
        movable = ub > lb
        m = self.d.m
        max_iter = cfg.max_lp_iterations or 50 * (self.d.n + m) + 1000

        def reduced_costs() -> np.ndarray:
            y = self.factor.btran(cmin[head])
            dd = cmin - self.d.KT @ y
            dd[head] = 0.0
            return dd

        d = reduced_costs()
        wrong_low = (state == _AT_LOWER) & movable & (d < -dtol)
        wrong_up = (state == _AT_UPPER) & movable & (d > dtol)
        if np.any(wrong_low & ~np.isfinite(ub)) or np.any(wrong_up & ~np.isfinite(lb)):
            return None
        if wrong_low.any() or wrong_up.any():
            state[wrong_low] = _AT_UPPER
            state[wrong_up] = _AT_LOWER
            self._refactor()
        weights = np.ones(m)
        pivots_since_refactor = 0
        verified = False
        while True:
            if self.iterations >= max_iter:
                raise NumericalInstability(f"dual simplex iteration limit {max_iter} reached")
            if self.iterations % 64 == 0:
                self._check_deadline()
            if pivots_since_refactor >= cfg.refactor_interval:
                self._refactor()
                d = reduced_costs()
                pivots_since_refactor = 0
            xB = x[head]
            lbB, ubB = lb[head], ub[head]
            infeas = np.where(xB < lbB - tol, lbB - xB, np.where(xB > ubB + tol, xB - ubB, 0.0))
            if not infeas.any():
                if pivots_since_refactor and not verified:
                    self._refactor()
                    d = reduced_costs()
                    pivots_since_refactor = 0
                    verified = True
                    continue
                bad = ((state == _AT_LOWER) & movable & (d < -1e3 * dtol)) | (
                    (state == _AT_UPPER) & movable & (d > 1e3 * dtol)
                )
                if bad.any():
                    # lost dual feasibility numerically; finish with primal from here
                    return self.primal()
                return self._finish()
            r = int(np.argmax(infeas * infeas / weights))
            leaving = int(head[r])
            below = xB[r] < lbB[r]
            target = lbB[r] if below else ubB[r]
            sgn = 1.0 if below else -1.0
            e = np.zeros(m)
            e[r] = 1.0
            rho = self.factor.btran(e)
            a = sgn * (self.d.KT @ rho)
            elig = ((state == _AT_LOWER) & (a < -ptol)) | ((state == _AT_UPPER) & (a > ptol))
            elig &= movable
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                if pivots_since_refactor and not verified:
                    self._refactor()
                    d = reduced_costs()
                    pivots_since_refactor = 0
                    verified = True
                    continue
                return RelaxedSolution(LPStatus.INFEASIBLE, None, float("nan"), self.iterations)
            verified = False
            dc = np.abs(d[cand])
            # dual values of the wrong sign count as zero
            dc = np.where(((state[cand] == _AT_LOWER) & (d[cand] < 0)) | ((state[cand] == _AT_UPPER) & (d[cand] > 0)), 0.0, dc)
            ac = np.abs(a[cand])
            tmax = np.min((dc + dtol) / ac)
            ratios = dc / ac
            ok = np.flatnonzero(ratios <= tmax)
            k = ok[np.argmax(ac[ok])]
            q = int(cand[k])
            t = float(ratios[k])

            alpha = self.factor.ftran(self._column(q))
            arq = alpha[r]
            if abs(arq) < cfg.pivot_tol:
                raise NumericalInstability(f"dual pivot {arq:.3e} below threshold")
            step = (xB[r] - target) / arq
            x[head] = xB - step * alpha
            x[q] += step
            x[leaving] = target
            d += t * a
            d[q] = 0.0
            state[leaving] = _AT_LOWER if (below or lb[leaving] == ub[leaving]) else _AT_UPPER
            state[q] = _BASIC

            # dual steepest-edge weights
            tau = self.factor.ftran(rho)
            w_r = float(rho @ rho)
            kappa = alpha / arq
            weights = weights - 2.0 * kappa * tau + kappa * kappa * w_r
            np.maximum(weights, 1e-8, out=weights)
            weights[r] = max(w_r / (arq * arq), 1e-8)

            head[r] = q
            self.factor.update(r, alpha)
            pivots_since_refactor += 1
            self.iterations += 1

    def _ratio_test(self, xB, lbB, ubB, delta, below, above, bland):
        """Harris two-pass ratio test.  Returns (row, step, bound hit) or (-1, inf, nan)."""
        tol = self.cfg.feas_tol
        ptol = self.cfg.ratio_pivot_tol
        dec = delta < -ptol
        inc = delta > ptol
        # the bound each moving basic variable runs into; infeasible ones stop at
        # the violated bound, and moving further away never blocks
        tgt_dec = np.where(above, ubB, lbB)
        tgt_inc = np.where(below, lbB, ubB)
        dec &= ~below & np.isfinite(tgt_dec)
        inc &= ~above & np.isfinite(tgt_inc)
        if not (dec.any() or inc.any()):
            return -1, np.inf, np.nan
        idx_dec = np.flatnonzero(dec)
        idx_inc = np.flatnonzero(inc)
        rows = np.concatenate([idx_dec, idx_inc])
        tgt = np.concatenate([tgt_dec[idx_dec], tgt_inc[idx_inc]])
        dist = np.concatenate([xB[idx_dec] - tgt_dec[idx_dec], tgt_inc[idx_inc] - xB[idx_inc]])
        mag = np.abs(delta[rows])
        exact = np.maximum(dist, 0.0) / mag
        if bland:
            tmin = exact.min()
            ties = np.flatnonzero(exact <= tmin + 1e-12)
            k = ties[np.argmin(self.head[rows[ties]])]
            return int(rows[k]), float(exact[k]), float(tgt[k])
        relaxed = (dist + tol) / mag
        tmax = relaxed.min()
        ok = np.flatnonzero(exact <= tmax)
        k = ok[np.argmax(mag[ok])]
        return int(rows[k]), float(exact[k]), float(tgt[k])

    def _finish(self) -> RelaxedSolution:
        n = self.d.n
        vals = np.clip(self.x[:n], self.lb[:n], self.ub[:n])
        obj = float(np.dot(self.d.cost[:n], vals))
        at_upper = frozenset(np.flatnonzero(self.state == _AT_UPPER).tolist())
        basis = Basis(tuple(self.head.tolist()), at_upper)
        return RelaxedSolution(LPStatus.OPTIMAL, vals, obj, self.iterations, basis)


def bounds_with_fixings(data: _LPData, extra_bounds: Iterable[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    lb = data.lb.copy()
    ub = data.ub.copy()
    for j, v in extra_bounds:
        if not 0 <= j < data.n:
            raise IndexError(f"bound on variable {j} of {data.n}")
        if v not in (0, 1):
            raise ValueError(f"variable {j} may only be fixed to 0 or 1, got {v}")
        lb[j] = ub[j] = float(v)
    return lb, ub


def solve_relaxation(
    p: Ilp01,
    cfg: SolverConfig | None = None,
    extra_bounds: Sequence[tuple[int, int]] = (),
    *,
    warm_start: Basis | None = None,
    deadline: float | None = None,
    method: str | None = None,
) -> RelaxedSolution:
    """Solve max c.x over the [0,1]-box LP relaxation with optional 0/1 fixings.

    Cold solves use ``method`` (default ``cfg.lp_method``).  A ``warm_start``
    basis is re-optimised with the dual simplex, since fixing variables keeps
    it dual feasible.  Raises :class:`NumericalInstability` if the basis
    degenerates numerically.
    """
    cfg = cfg or SolverConfig()
    method = method or cfg.lp_method
    data = lp_data(p)
    lb, ub = bounds_with_fixings(data, extra_bounds)
    if warm_start is not None:
        try:
            res = BoundedSimplex(data, cfg, lb, ub, warm_start, deadline).dual()
            if res is not None:
                return res
        except NumericalInstability:
            pass
    solver = BoundedSimplex(data, cfg, lb, ub, None, deadline)
    if method == "dual":
        res = solver.dual()
        if res is not None:
            return res
        solver = BoundedSimplex(data, cfg, lb, ub, None, deadline)
    return solver.primal()
