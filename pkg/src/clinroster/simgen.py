"""Seeded synthetic rostering instances for runtime experiments."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import (
    AdjacencyMap,
    Clinician,
    NcbMode,
    ObjectiveWeights,
    ProblemInstance,
    feasibility_presolve,
    validate_instance,
)


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class SimParams:
    """Simulation knobs.

    ``num_weekends=None`` means ``2*num_blocks - 1`` (one weekend inside each
    two-week block and one between consecutive blocks).
    ``num_long_weekends=None`` means about ten per 26-block year,
    ``round(10 * B / 26)``, capped at the number of weekends.
    ``weekend_requests_per_clinician=None`` reuses ``requests_per_clinician``.
    """

    num_clinicians: int
    num_services: int
    num_blocks: int = 26
    num_weekends: int | None = None
    num_long_weekends: int | None = None
    requests_per_clinician: int = 5
    weekend_requests_per_clinician: int | None = None
    ncb_mode: NcbMode = NcbMode.PER_SERVICE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ncb_mode", NcbMode.parse(self.ncb_mode))

    @property
    def weekends(self) -> int:
        return 2 * self.num_blocks - 1 if self.num_weekends is None else self.num_weekends

    @property
    def long_weekends(self) -> int:
        if self.num_long_weekends is None:
            return min(round(10 * self.num_blocks / 26), self.weekends)
        return self.num_long_weekends

    @property
    def weekend_requests(self) -> int:
        if self.weekend_requests_per_clinician is None:
            return self.requests_per_clinician
        return self.weekend_requests_per_clinician

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ncb_mode"] = self.ncb_mode.value
        return d


def evenly_spaced(count: int, total: int) -> list[int]:
    """``count`` distinct 1-based positions spread across 1..total."""
    return [int((k + 0.5) * total / count) + 1 for k in range(count)]


def generate(p: SimParams, weights: ObjectiveWeights | None = None) -> ProblemInstance:
    C, S, B, W = p.num_clinicians, p.num_services, p.num_blocks, p.weekends
    counts = (C, S, B, W, p.long_weekends, p.requests_per_clinician, p.weekend_requests)
    if any(v < 0 for v in counts):
        raise ParamError(f"counts must be non-negative: {counts}")
    if min(C, S, B, W) < 1:
        raise ParamError("need at least one clinician, service, block and weekend")
    if p.long_weekends > W:
        raise ParamError(f"{p.long_weekends} long weekends do not fit in {W} weekends")

    rng = np.random.default_rng(p.seed)
    lo = max(B // C - 1, 0)
    hi = min(-(-B // C) + 1, B)
    width = len(str(C))
    clinicians = []
    for c in range(C):
        nb = min(p.requests_per_clinician, B)
        nw = min(p.weekend_requests, W)
        breq = rng.choice(B, size=nb, replace=False) + 1
        wreq = rng.choice(W, size=nw, replace=False) + 1
        clinicians.append(
            Clinician(
                name=f"C{c + 1:0{width}d}",
                block_requests=frozenset(int(b) for b in breq),
                weekend_requests=frozenset(int(w) for w in wreq),
                min_blocks=(lo,) * S,
                max_blocks=(hi,) * S,
            )
        )
    inst = ProblemInstance(
        num_services=S,
        num_blocks=B,
        num_weekends=W,
        clinicians=tuple(clinicians),
        long_weekends=frozenset(evenly_spaced(p.long_weekends, W)) if p.long_weekends else frozenset(),
        adjacency=AdjacencyMap.within_block(B, W),
        weights=weights or ObjectiveWeights(),
        ncb_mode=p.ncb_mode,
    )
    rep = validate_instance(inst)
    if not rep.ok:
        raise ParamError("; ".join(rep.violations))
    pre = feasibility_presolve(inst)
    if pre.infeasible:
        raise ParamError("; ".join(pre.flags))
    return inst
