import dataclasses

import numpy as np
import pytest

from clinroster.formulation import (
    DecodeError,
    VariableLayout,
    build,
    decode,
    encode,
    family_counts,
    normalizers,
    objective_breakdown,
)
from clinroster.ilpcore import IPStatus, branch_and_bound, check_feasible
from clinroster.model import Clinician, NcbMode, ProblemInstance
from clinroster.oracle import brute_force
from clinroster.simgen import SimParams, generate
from clinroster.validator import Schedule
from tiny import random_tiny


def two_by_two(ncb=NcbMode.PER_SERVICE, **kw) -> ProblemInstance:
    cl = [Clinician(f"c{i}", frozenset(), frozenset(), (0,), (2,)) for i in (1, 2)]
    return ProblemInstance(1, 2, 2, tuple(cl), ncb_mode=ncb, **kw)


def test_layout_counts_on_year_shaped_instance():
    inst = generate(SimParams(9, 2, 26, seed=0))
    p, layout = build(inst)
    assert (layout.num_block_vars, layout.num_weekend_vars, layout.num_pair_vars) == (468, 459, 468)
    assert p.num_vars == 1395
    counts = family_counts(p)
    assert counts == {"BC": 52, "WC": 51, "MM": 36, "NCB": 450, "NCW": 450, "EW": 18, "EH": 18, "LIN": 936}


def test_row_counts_on_tiny_instance():
    p, layout = build(two_by_two())
    assert family_counts(p) == {"BC": 2, "WC": 2, "MM": 4, "NCB": 2, "NCW": 2, "EW": 4, "EH": 4, "LIN": 4}
    assert layout.paired_blocks == (1,)


@pytest.mark.parametrize("mode,rows", [(NcbMode.PER_SERVICE, 9 * 25 * 2), (NcbMode.CROSS_SERVICE, 9 * 25),
                                       (NcbMode.OFF, 0)])
def test_ncb_modes(mode, rows):
    inst = generate(SimParams(9, 2, 26, ncb_mode=mode, seed=1))
    assert family_counts(build(inst)[0])["NCB"] == rows


def test_layout_is_a_bijection_onto_contiguous_ranges():
    inst = generate(SimParams(3, 2, 5, num_long_weekends=2, seed=0))
    layout = VariableLayout.for_instance(inst)
    idx = [layout.block_var(c, b, s) for c in range(1, 4) for b in range(1, 6) for s in (1, 2)]
    idx += [layout.weekend_var(c, w) for c in range(1, 4) for w in range(1, 10)]
    idx += [layout.pair_var(c, b, s) for c in range(1, 4) for b in layout.paired_blocks for s in (1, 2)]
    assert sorted(idx) == list(range(layout.num_vars))


def test_objective_coefficients():
    inst = generate(SimParams(3, 2, 4, num_long_weekends=2, requests_per_clinician=2, seed=4))
    p, layout = build(inst)
    n_block, n_weekend, n_pair = normalizers(inst)
    assert (n_block, n_weekend, n_pair) == (8, 7, 4 * 2)
    for c, cl in enumerate(inst.clinicians, start=1):
        for b in range(1, 5):
            sign = -1 if b in cl.block_requests else 1
            assert p.objective[layout.block_var(c, b, 1)] == pytest.approx(sign / n_block)
        for w in range(1, 8):
            sign = -1 if w in cl.weekend_requests else 1
            assert p.objective[layout.weekend_var(c, w)] == pytest.approx(sign / n_weekend)
        assert p.objective[layout.pair_var(c, 1, 2)] == pytest.approx(1 / n_pair)


def test_encode_decode_round_trip():
    inst = two_by_two()
    sch = Schedule({(1, 1): 1, (2, 1): 2}, {1: 2, 2: 1})
    p, layout = build(inst)
    v = encode(layout, sch, inst)
    assert check_feasible(p, v.tolist())
    assert decode(layout, v) == sch


def test_decode_rejects_double_assignment():
    inst = two_by_two()
    p, layout = build(inst)
    v = encode(layout, Schedule({(1, 1): 1, (2, 1): 2}, {1: 2, 2: 1}), inst)
    v[layout.block_var(2, 1, 1)] = 1
    with pytest.raises(DecodeError):
        decode(layout, v)


def test_breakdown_examples():
    inst = generate(SimParams(4, 1, 6, num_long_weekends=2, requests_per_clinician=1, seed=2))
    p, layout = build(inst)
    sol = branch_and_bound(p)
    assert sol.status is IPStatus.OPTIMAL
    bd = objective_breakdown(layout, sol.values, inst)
    # one request each is always avoidable here
    assert bd.block_score == 6 and bd.weekend_score == 11
    sch = decode(layout, sol)
    b, c = 1, sch.block_assignee[(1, 1)]
    cl = inst.clinicians[c - 1]
    moved = dataclasses.replace(cl, block_requests=frozenset({b}))
    inst2 = dataclasses.replace(inst, clinicians=tuple(moved if x is cl else x for x in inst.clinicians))
    assert objective_breakdown(layout, sol.values, inst2).block_score == 6 - 2


def test_tiny_optima_match_oracle_triples():
    checked = 0
    seed = 0
    while checked < 25:
        inst = random_tiny(seed)
        seed += 1
        o = brute_force(inst)
        if not o.feasible:
            continue
        p, layout = build(inst)
        sol = branch_and_bound(p)
        bd = objective_breakdown(layout, sol.values, inst)
        assert bd.weighted == pytest.approx(o.objective, abs=1e-9)
        assert sol.objective == pytest.approx(bd.weighted, abs=1e-9)
        checked += 1


def test_lin_rows_tight_at_optimum():
    inst = generate(SimParams(5, 2, 8, num_long_weekends=3, seed=6))
    p, layout = build(inst)
    sol = branch_and_bound(p)
    v = sol.values
    z_sum = int(v[layout.num_block_vars + layout.num_weekend_vars:].sum())
    assert z_sum == objective_breakdown(layout, v, inst).adjacency_score


def test_removing_ncb_never_lowers_the_optimum():
    seen = 0
    for seed in range(80):
        base = random_tiny(seed)
        vals = {}
        for mode in NcbMode:
            o = brute_force(dataclasses.replace(base, ncb_mode=mode))
            vals[mode] = o.objective if o.feasible else -np.inf
        assert vals[NcbMode.CROSS_SERVICE] <= vals[NcbMode.PER_SERVICE] + 1e-12
        assert vals[NcbMode.PER_SERVICE] <= vals[NcbMode.OFF] + 1e-12
        seen += np.isfinite(vals[NcbMode.CROSS_SERVICE])
    assert seen > 5
