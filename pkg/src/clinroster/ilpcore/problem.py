"""Generic 0-1 integer linear program container and exact feasibility check."""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
import scipy.sparse as sp


class Sense(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="

    @classmethod
    def parse(cls, value: "str | Sense") -> "Sense":
        if isinstance(value, Sense):
            return value
        v = value.strip()
        return {"<=": cls.LE, "=<": cls.LE, "<": cls.LE, ">=": cls.GE, "=>": cls.GE,
                ">": cls.GE, "=": cls.EQ, "==": cls.EQ}[v]


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, float], ...]
    sense: Sense
    rhs: float
    name: str = ""


@dataclass(frozen=True, eq=False)
class Ilp01:
    """A maximization problem over binary variables.

    ``matrix`` is the (rows x vars) CSR constraint matrix; every variable is
    implicitly boxed to [0, 1].
    """

    var_names: tuple[str, ...]
    matrix: sp.csr_matrix
    senses: tuple[Sense, ...]
    rhs: np.ndarray
    objective: np.ndarray
    row_names: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.var_names)
        m = len(self.senses)
        if self.matrix.shape != (m, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {m} rows x {n} vars")
        if self.rhs.shape != (m,) or self.objective.shape != (n,):
            raise ValueError("rhs/objective length mismatch")
        if not self.row_names:
            object.__setattr__(self, "row_names", tuple(f"r{i}" for i in range(m)))
        for arr in (self.rhs, self.objective, self.matrix.data):
            arr.setflags(write=False)

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.senses)

    def rows(self) -> Iterator[Row]:
        A = self.matrix
        for i in range(self.num_rows):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            coeffs = tuple(zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()))
            yield Row(coeffs, self.senses[i], float(self.rhs[i]), self.row_names[i])

    def objective_value(self, values: Sequence[float]) -> float:
        return float(np.dot(self.objective, np.asarray(values, dtype=float)))

    @functools.cached_property
    def integral_coefficients(self) -> bool:
        return bool(np.all(np.mod(self.matrix.data, 1.0) == 0) and np.all(np.mod(self.rhs, 1.0) == 0))

    @classmethod
    def from_rows(
        cls,
        num_vars: int,
        rows: Iterable[Row | tuple],
        objective: Sequence[float] | dict[int, float],
        var_names: Sequence[str] | None = None,
    ) -> "Ilp01":
        b = IlpBuilder()
        names = list(var_names) if var_names is not None else [f"x{j + 1}" for j in range(num_vars)]
        for nm in names:
            b.add_var(nm)
        for r in rows:
            if not isinstance(r, Row):
                r = Row(tuple(r[0]), Sense.parse(r[1]), float(r[2]), *(r[3:4]))
            b.add_row(r.coeffs, r.sense, r.rhs, r.name)
        items = objective.items() if isinstance(objective, dict) else enumerate(objective)
        for j, c in items:
            b.set_objective(j, c)
        return b.build()


@dataclass
class IlpBuilder:
    """Incremental row/column builder for :class:`Ilp01`."""

    var_names: list[str] = field(default_factory=list)
    _obj: dict[int, float] = field(default_factory=dict)
    _rows_i: list[int] = field(default_factory=list)
    _rows_j: list[int] = field(default_factory=list)
    _rows_v: list[float] = field(default_factory=list)
    _senses: list[Sense] = field(default_factory=list)
    _rhs: list[float] = field(default_factory=list)
    _row_names: list[str] = field(default_factory=list)

    def add_var(self, name: str) -> int:
        self.var_names.append(name)
        return len(self.var_names) - 1

    def set_objective(self, j: int, coef: float) -> None:
        if not 0 <= j < len(self.var_names):
            raise IndexError(f"objective references variable {j} of {len(self.var_names)}")
        self._obj[j] = float(coef)

    def add_row(self, coeffs: "Iterable[tuple[int, float]] | Mapping[int, float]", sense: "Sense | str",
                rhs: float, name: str = "") -> int:
        if isinstance(coeffs, Mapping):
            coeffs = coeffs.items()
        i = len(self._senses)
        n = len(self.var_names)
        merged: dict[int, float] = {}
        for j, v in coeffs:
            if not 0 <= j < n:
                raise IndexError(f"row {name or i} references variable {j} of {n}")
            merged[j] = merged.get(j, 0.0) + float(v)
        for j in sorted(merged):
            if merged[j] != 0.0:
                self._rows_i.append(i)
                self._rows_j.append(j)
                self._rows_v.append(merged[j])
        self._senses.append(Sense.parse(sense))
        self._rhs.append(float(rhs))
        self._row_names.append(name or f"r{i}")
        return i

    @property
    def num_rows(self) -> int:
        return len(self._senses)

    def build(self) -> Ilp01:
        n, m = len(self.var_names), len(self._senses)
        A = sp.csr_matrix(
            (np.asarray(self._rows_v, dtype=float), (np.asarray(self._rows_i, dtype=np.int64),
                                                     np.asarray(self._rows_j, dtype=np.int64))),
            shape=(m, n),
        )
        A.sort_indices()
        obj = np.zeros(n)
        for j, c in self._obj.items():
            obj[j] = c
        return Ilp01(
            var_names=tuple(self.var_names),
            matrix=A,
            senses=tuple(self._senses),
            rhs=np.asarray(self._rhs, dtype=float),
            objective=obj,
            row_names=tuple(self._row_names),
        )


def _exact(v: float) -> int | Fraction:
    return int(v) if float(v).is_integer() else Fraction(v)


def row_activity(p: Ilp01, values: Sequence[int]) -> list[int | Fraction]:
    """Left-hand side of every row, computed exactly for a 0/1 vector."""
    A = p.matrix
    out: list[int | Fraction] = []
    vals = [int(v) for v in values]
    for i in range(p.num_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        acc: int | Fraction = 0
        for j, a in zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()):
            if vals[j]:
                acc += _exact(a) * vals[j]
        out.append(acc)
    return out


def check_feasible(p: Ilp01, values: Sequence[float]) -> bool:
    """True iff ``values`` is a 0/1 vector satisfying every row exactly."""
    if len(values) != p.num_vars:
        raise ValueError(f"expected {p.num_vars} values, got {len(values)}")
    for v in values:
        if v != 0 and v != 1:
            return False
    for act, sense, rhs in zip(row_activity(p, values), p.senses, p.rhs.tolist()):
        r = _exact(rhs)
        if sense is Sense.LE and not act <= r:
            return False
        if sense is Sense.GE and not act >= r:
            return False
        if sense is Sense.EQ and act != r:
            return False
    return True
