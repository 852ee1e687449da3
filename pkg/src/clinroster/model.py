"""Problem-domain types for block/weekend clinician rostering.

All indices (services, blocks, weekends) are 1-based and contiguous.
Instances are immutable once built; use :func:`dataclasses.replace` to derive
variants (e.g. switching ``ncb_mode`` for an ablation run).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class NcbMode(str, enum.Enum):
    """How the no-consecutive-blocks family is emitted."""

    PER_SERVICE = "per-service"
    CROSS_SERVICE = "cross-service"
    OFF = "off"

    @classmethod
    def parse(cls, value: "str | NcbMode") -> "NcbMode":
        if isinstance(value, NcbMode):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"perservice": "per-service", "crossservice": "cross-service"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown ncb mode {value!r}; expected one of "
                + ", ".join(m.value for m in cls)
            ) from None


@dataclass(frozen=True)
class Clinician:
    name: str
    block_requests: frozenset[int]
    weekend_requests: frozenset[int]
    min_blocks: tuple[int, ...]
    max_blocks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "block_requests", frozenset(self.block_requests))
        object.__setattr__(self, "weekend_requests", frozenset(self.weekend_requests))
        object.__setattr__(self, "min_blocks", tuple(self.min_blocks))
        object.__setattr__(self, "max_blocks", tuple(self.max_blocks))


@dataclass(frozen=True)
class AdjacencyMap:
    """Injective block -> weekend map; blocks outside the domain have no adjacent weekend."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted((int(b), int(w)) for b, w in self.pairs)))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "AdjacencyMap":
        return cls(tuple(mapping.items()))

    @classmethod
    def within_block(cls, num_blocks: int, num_weekends: int) -> "AdjacencyMap":
        """The default map b -> 2b-1, truncated to the weekends that exist."""
        return cls(tuple((b, 2 * b - 1) for b in range(1, num_blocks + 1) if 2 * b - 1 <= num_weekends))

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def get(self, block: int) -> int | None:
        return self.as_dict().get(block)

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(b for b, _ in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ObjectiveWeights:
    block_requests: float = 1.0
    weekend_requests: float = 1.0
    adjacency: float = 1.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.block_requests, self.weekend_requests, self.adjacency)

    @classmethod
    def parse(cls, value: "str | Iterable[float] | ObjectiveWeights") -> "ObjectiveWeights":
        if isinstance(value, ObjectiveWeights):
            return value
        if isinstance(value, str):
            value = [float(v) for v in value.split(",")]
        vals = [float(v) for v in value]
        if len(vals) != 3:
            raise ValueError(f"expected 3 weights, got {len(vals)}")
        return cls(*vals)


@dataclass(frozen=True)
class ProblemInstance:
    num_services: int
    num_blocks: int
    num_weekends: int
    clinicians: tuple[Clinician, ...]
    long_weekends: frozenset[int] = frozenset()
    adjacency: AdjacencyMap | None = None
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    ncb_mode: NcbMode = NcbMode.PER_SERVICE
    block_size_weeks: int = 2

    def __post_init__(self):
        object.__setattr__(self, "clinicians", tuple(self.clinicians))
        object.__setattr__(self, "long_weekends", frozenset(self.long_weekends))
        object.__setattr__(self, "ncb_mode", NcbMode.parse(self.ncb_mode))
        if self.adjacency is None:
            object.__setattr__(
                self, "adjacency", AdjacencyMap.within_block(self.num_blocks, self.num_weekends)
            )

    @property
    def num_clinicians(self) -> int:
        return len(self.clinicians)

    @property
    def blocks(self) -> range:
        return range(1, self.num_blocks + 1)

    @property
    def weekends(self) -> range:
        return range(1, self.num_weekends + 1)

    @property
    def services(self) -> range:
        return range(1, self.num_services + 1)

    def weekend_bounds(self) -> tuple[int, int]:
        """Per-clinician (floor, ceil) of W / C."""
        c = self.num_clinicians
        return self.num_weekends // c, -(-self.num_weekends // c)

    def holiday_bounds(self) -> tuple[int, int]:
        c = self.num_clinicians
        n = len(self.long_weekends)
        return n // c, -(-n // c)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class PresolveReport:
    flags: tuple[str, ...] = ()

    @property
    def infeasible(self) -> bool:
        return bool(self.flags)


def validate_instance(inst: ProblemInstance) -> ValidationReport:
    """Check structural invariants and the per-service coverage counting bound."""
    out: list[str] = []
    S, B, W = inst.num_services, inst.num_blocks, inst.num_weekends
    if S < 1:
        out.append(f"number of services must be >= 1 (got {S})")
    if B < 1:
        out.append(f"number of blocks must be >= 1 (got {B})")
    if W < 1:
        out.append(f"number of weekends must be >= 1 (got {W})")
    if inst.block_size_weeks < 1:
        out.append(f"block size must be >= 1 week (got {inst.block_size_weeks})")
    if not inst.clinicians:
        out.append("at least one clinician is required")

    for w in sorted(inst.long_weekends):
        if not 1 <= w <= W:
            out.append(f"long weekend {w} outside [1, {W}]")

    seen: set[str] = set()
    for cl in inst.clinicians:
        if cl.name in seen:
            out.append(f"duplicate clinician name {cl.name!r}")
        seen.add(cl.name)
        if len(cl.min_blocks) != S or len(cl.max_blocks) != S:
            out.append(
                f"clinician {cl.name!r}: expected {S} min/max entries, "
                f"got {len(cl.min_blocks)}/{len(cl.max_blocks)}"
            )
            continue
        for s, (lo, hi) in enumerate(zip(cl.min_blocks, cl.max_blocks), start=1):
            if lo < 0:
                out.append(f"clinician {cl.name!r}: negative min on service {s} ({lo})")
            if lo > hi:
                out.append(f"clinician {cl.name!r}: min exceeds max on service {s} ({lo} > {hi})")
            if hi > B:
                out.append(f"clinician {cl.name!r}: max exceeds number of blocks on service {s} ({hi} > {B})")
        for b in sorted(cl.block_requests):
            if not 1 <= b <= B:
                out.append(f"clinician {cl.name!r}: block request {b} outside [1, {B}]")
        for w in sorted(cl.weekend_requests):
            if not 1 <= w <= W:
                out.append(f"clinician {cl.name!r}: weekend request {w} outside [1, {W}]")

    images: dict[int, int] = {}
    for b, w in inst.adjacency.pairs:
        if not 1 <= b <= B:
            out.append(f"adjacency block {b} outside [1, {B}]")
        if not 1 <= w <= W:
            out.append(f"adjacency weekend {w} (block {b}) outside [1, {W}]")
        if w in images:
            out.append(f"adjacency not injective: blocks {images[w]} and {b} both map to weekend {w}")
        images[w] = b
    if len(set(inst.adjacency.domain)) != len(inst.adjacency.pairs):
        out.append("adjacency maps a block more than once")

    alphas = inst.weights.as_tuple()
    for i, a in enumerate(alphas, start=1):
        if not (0.0 <= a <= 1.0) or math.isnan(a):
            out.append(f"weight {i} outside [0, 1] ({a})")
    if all(a == 0 for a in alphas):
        out.append("all objective weights are zero")

    if inst.clinicians and all(len(c.min_blocks) == S and len(c.max_blocks) == S for c in inst.clinicians):
        for s in range(S):
            lo = sum(c.min_blocks[s] for c in inst.clinicians)
            hi = sum(c.max_blocks[s] for c in inst.clinicians)
            if lo > B:
                out.append(f"service {s + 1}: Σ min ({lo}) > B ({B})")
            if hi < B:
                out.append(f"service {s + 1}: Σ max ({hi}) < B ({B})")
    return ValidationReport(tuple(out))


def feasibility_presolve(inst: ProblemInstance) -> PresolveReport:
    """Cheap necessary conditions that an otherwise valid instance can still fail."""
    flags: list[str] = []
    C = inst.num_clinicians
    lo, hi = inst.weekend_bounds()
    if not (lo <= hi and C * lo <= inst.num_weekends <= C * hi):
        flags.append(f"equal-weekend bounds inconsistent: {lo}..{hi} for W={inst.num_weekends}, C={C}")
    lo, hi = inst.holiday_bounds()
    n_long = len(inst.long_weekends)
    if not (lo <= hi and C * lo <= n_long <= C * hi):
        flags.append(f"equal-holiday bounds inconsistent: {lo}..{hi} for |L|={n_long}, C={C}")
    if inst.ncb_mode is not NcbMode.OFF and inst.num_blocks >= 2 and C < 2:
        flags.append(
            "a single clinician must cover consecutive blocks, which the no-consecutive-blocks "
            "constraint forbids"
        )
    return PresolveReport(tuple(flags))
