import pytest

from clinroster.files import dump_instance, parse_instance
from clinroster.model import NcbMode, feasibility_presolve, validate_instance
from clinroster.simgen import ParamError, SimParams, evenly_spaced, generate


def test_same_seed_same_bytes():
    p = SimParams(10, 2, 26, num_weekends=51, seed=42)
    assert dump_instance(generate(p)) == dump_instance(generate(p))
    assert dump_instance(generate(p)) != dump_instance(generate(SimParams(10, 2, 26, seed=43)))


def test_single_service_year_validates():
    assert validate_instance(generate(SimParams(10, 1, 26, num_weekends=51))).ok


@pytest.mark.parametrize("C", [10, 20, 30, 50])
@pytest.mark.parametrize("S", [1, 2, 3])
def test_grid_passes_presolve(C, S):
    inst = generate(SimParams(C, S, 26, seed=C * S))
    assert validate_instance(inst).ok
    assert not feasibility_presolve(inst).infeasible


def test_request_counts_exact():
    inst = generate(SimParams(7, 2, 10, requests_per_clinician=4, weekend_requests_per_clinician=6, seed=1))
    assert all(len(c.block_requests) == 4 and len(c.weekend_requests) == 6 for c in inst.clinicians)
    inst = generate(SimParams(3, 1, 4, requests_per_clinician=9, seed=1))
    assert all(len(c.block_requests) == 4 and len(c.weekend_requests) == 7 for c in inst.clinicians)


def test_bounds_scheme():
    inst = generate(SimParams(9, 2, 26))
    c = inst.clinicians[0]
    assert c.min_blocks == (1, 1) and c.max_blocks == (4, 4)
    inst = generate(SimParams(50, 1, 26))
    assert inst.clinicians[0].min_blocks == (0,) and inst.clinicians[0].max_blocks == (2,)


def test_defaults_and_adjacency():
    inst = generate(SimParams(4, 1, 5))
    assert inst.num_weekends == 9
    assert len(inst.long_weekends) == 2
    assert inst.adjacency.as_dict() == {b: 2 * b - 1 for b in range(1, 6)}


def test_evenly_spaced():
    assert evenly_spaced(10, 51) == sorted(set(evenly_spaced(10, 51)))
    assert evenly_spaced(1, 1) == [1]


def test_json_round_trip_of_generated_instance():
    inst = generate(SimParams(6, 3, 8, ncb_mode=NcbMode.OFF, seed=5))
    assert parse_instance(dump_instance(inst)) == inst


def test_bad_params():
    with pytest.raises(ParamError):
        generate(SimParams(0, 1, 4))
    with pytest.raises(ParamError):
        generate(SimParams(3, 1, 4, num_weekends=2, num_long_weekends=3))
    with pytest.raises(ParamError):
        generate(SimParams(1, 1, 4))
