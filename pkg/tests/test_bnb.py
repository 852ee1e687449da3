import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clinroster.ilpcore import (
    IlpBuilder,
    Ilp01,
    IPStatus,
    NodeOrder,
    BranchingRule,
    Row,
    Sense,
    SolverConfig,
    branch_and_bound,
    check_feasible,
    objective_lattice,
    solve_relaxation,
)


def enumerate_best(p: Ilp01):
    """Best 0/1 objective by listing all 2^n points (independent of the solver)."""
    A = p.matrix.toarray()
    best = None
    for bits in itertools.product((0, 1), repeat=p.num_vars):
        x = np.array(bits)
        act = A @ x
        ok = all(
            (s is Sense.LE and a <= b + 1e-9) or (s is Sense.GE and a >= b - 1e-9) or (s is Sense.EQ and abs(a - b) <= 1e-9)
            for a, s, b in zip(act, p.senses, p.rhs)
        )
        if ok:
            v = float(p.objective @ x)
            best = v if best is None else max(best, v)
    return best


def random_ilp(rng, n, m) -> Ilp01:
    rows = []
    x0 = rng.integers(0, 2, size=n)
    for i in range(m):
        a = rng.integers(-2, 3, size=n)
        s = [Sense.LE, Sense.GE, Sense.EQ][rng.choice(3, p=[0.5, 0.35, 0.15])]
        act = int(a @ x0)
        rhs = act + (int(rng.integers(-1, 2)) if s is not Sense.EQ else 0)
        rows.append(Row(tuple((j, float(v)) for j, v in enumerate(a) if v), s, float(rhs), f"r{i}"))
    c = rng.integers(-4, 5, size=n) / rng.choice([1, 2, 3, 7])
    return Ilp01.from_rows(n, rows, c.tolist())


def test_path_independent_set():
    p = Ilp01.from_rows(3, [([(0, 1), (1, 1)], "<=", 1), ([(1, 1), (2, 1)], "<=", 1)], [1, 1, 1])
    s = branch_and_bound(p)
    assert s.status is IPStatus.OPTIMAL
    assert s.objective == 2
    assert s.values.tolist() == [1, 0, 1]


def test_integral_root_needs_one_node():
    # assign 2 items to 2 slots
    b = IlpBuilder()
    x = {(i, j): b.add_var(f"x{i}{j}") for i in range(2) for j in range(2)}
    for (i, j), v in x.items():
        b.set_objective(v, [3.0, 1.0, 2.0, 5.0][2 * i + j])
    for i in range(2):
        b.add_row({x[i, j]: 1 for j in range(2)}.items(), Sense.EQ, 1)
        b.add_row({x[j, i]: 1 for j in range(2)}.items(), Sense.EQ, 1)
    s = branch_and_bound(b.build())
    assert s.status is IPStatus.OPTIMAL
    assert s.node_count == 1
    assert s.objective == 8.0


def test_infeasible_problem():
    p = Ilp01.from_rows(2, [([(0, 1), (1, 1)], "=", 1), ([(0, 1), (1, 1)], ">=", 2)], [1, 1])
    s = branch_and_bound(p)
    assert s.status is IPStatus.INFEASIBLE
    assert not s.has_incumbent


def test_integer_infeasible_but_lp_feasible():
    # 2x1 + 2x2 = 1 has LP points but no 0/1 point
    p = Ilp01.from_rows(2, [([(0, 2), (1, 2)], "=", 1)], [1, 0])
    assert solve_relaxation(p).status.value == "optimal"
    assert branch_and_bound(p).status is IPStatus.INFEASIBLE


@pytest.mark.parametrize("order", list(NodeOrder))
@pytest.mark.parametrize("rule", list(BranchingRule))
@pytest.mark.parametrize("dive", [True, False])
def test_random_ilps_match_enumeration(order, rule, dive):
    rng = np.random.default_rng(2024)
    cfg = SolverConfig(node_order=order, branching=rule, dive=dive)
    for _ in range(40):
        n, m = int(rng.integers(2, 9)), int(rng.integers(1, 6))
        p = random_ilp(rng, n, m)
        want = enumerate_best(p)
        s = branch_and_bound(p, cfg)
        if want is None:
            assert s.status is IPStatus.INFEASIBLE
        else:
            assert s.status is IPStatus.OPTIMAL
            assert s.objective == pytest.approx(want, abs=1e-9)
            assert check_feasible(p, s.values.tolist())
            assert s.objective <= s.root_bound + 1e-7


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_deterministic_and_monotone_bound(seed):
    rng = np.random.default_rng(seed)
    p = random_ilp(rng, 10, 6)
    a = branch_and_bound(p)
    b = branch_and_bound(p)
    assert a.status is b.status
    assert a.node_count == b.node_count
    if a.values is not None:
        assert a.values.tolist() == b.values.tolist()
    trace = [t for t in a.bound_trace if math.isfinite(t)]
    assert all(x >= y - 1e-9 for x, y in zip(trace, trace[1:]))


def test_time_limit_returns_incumbent_and_valid_bound():
    rng = np.random.default_rng(5)
    p = random_ilp(rng, 30, 20)
    s = branch_and_bound(p, SolverConfig(max_nodes=3, dive=False))
    assert s.status in (IPStatus.TIMED_OUT, IPStatus.OPTIMAL, IPStatus.INFEASIBLE)
    if s.status is IPStatus.TIMED_OUT and s.has_incumbent:
        assert s.best_bound >= s.objective - 1e-9
        assert s.gap >= 0
    z = branch_and_bound(p, SolverConfig(time_limit=0.0))
    assert z.status in (IPStatus.TIMED_OUT, IPStatus.OPTIMAL, IPStatus.INFEASIBLE)


def test_objective_lattice():
    assert objective_lattice(np.array([1 / 3, 2 / 3, -1.0])) == pytest.approx(1 / 3)
    assert objective_lattice(np.array([0.5, 0.25])) == pytest.approx(0.25)
    assert objective_lattice(np.zeros(3)) is None
    assert objective_lattice(np.array([math.pi, math.e])) is None


def test_cut_generator_hook_is_called_and_rows_kept_valid():
    p = Ilp01.from_rows(3, [([(0, 1), (1, 1), (2, 1)], "<=", 2)], [1, 1, 1])
    seen = []

    def cuts(prob, relaxed):
        seen.append(relaxed.objective)
        if len(seen) == 1:
            return [Row(((0, 1.0), (1, 1.0)), Sense.LE, 1.0, "clique")]
        return []

    s = branch_and_bound(p, cut_generator=cuts)
    assert len(seen) == 2
    assert s.objective == 2.0
    assert s.values[0] + s.values[1] <= 1


def test_check_feasible_examples():
    p = Ilp01.from_rows(1, [([(0, 1)], "=", 1)], [0])
    assert not check_feasible(p, [0])
    q = Ilp01.from_rows(1, [([(0, 1)], "<=", 1)], [0])
    assert check_feasible(q, [0])
    assert not check_feasible(q, [0.5])
    with pytest.raises(ValueError):
        check_feasible(q, [0, 1])


def test_check_feasible_uses_exact_integers():
    # 2^53 + 1 - 2^53 is 0 in floating point but 1 exactly
    big = float(2**53)
    p = Ilp01.from_rows(3, [([(0, big), (1, 1.0), (2, -big)], "=", 1)], [0, 0, 0])
    assert check_feasible(p, [1, 1, 1])
    assert not check_feasible(p, [1, 0, 1])


def test_builder_rejects_bad_indices():
    b = IlpBuilder()
    b.add_var("x")
    with pytest.raises(IndexError):
        b.add_row([(3, 1.0)], Sense.LE, 1)
    with pytest.raises(IndexError):
        b.set_objective(2, 1.0)


def test_builder_merges_duplicate_terms():
    b = IlpBuilder()
    x = b.add_var("x")
    b.add_row([(x, 1.0), (x, 2.0)], "<=", 3)
    p = b.build()
    assert list(p.rows())[0].coeffs == ((0, 3.0),)
