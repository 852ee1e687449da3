"""Vertex-enumeration reference for tiny [0,1]-box LPs (test helper)."""

from itertools import combinations

import numpy as np

from clinroster.ilpcore import Ilp01, Row, Sense


def vertex_max(A, senses, rhs, c, tol=1e-9):
    """Max of c.x over {A x (senses) rhs, 0 <= x <= 1} by enumerating basic points.

    Every vertex is the solution of n linearly independent active hyperplanes
    drawn from the rows and the 2n box faces.  Returns None when no vertex is
    feasible (the box keeps the set bounded, so nonempty implies a vertex).
    """
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    m, n = A.shape
    normals = np.vstack([A, np.eye(n), np.eye(n)])
    offsets = np.concatenate([rhs, np.zeros(n), np.ones(n)])
    combos = np.array(list(combinations(range(len(offsets)), n)))
    M = normals[combos]
    keep = np.abs(np.linalg.det(M)) > 1e-9
    M, combos = M[keep], combos[keep]
    X = np.linalg.solve(M, offsets[combos][..., None])[..., 0]
    ok = np.all((X >= -tol) & (X <= 1 + tol), axis=1)
    act = X @ A.T
    for i, s in enumerate(senses):
        if s == "<=":
            ok &= act[:, i] <= rhs[i] + tol
        elif s == ">=":
            ok &= act[:, i] >= rhs[i] - tol
        else:
            ok &= np.abs(act[:, i] - rhs[i]) <= tol
    if not ok.any():
        return None
    return float((X[ok] @ np.asarray(c, dtype=float)).max())


SENSES = {"<=": Sense.LE, ">=": Sense.GE, "=": Sense.EQ}


def make_lp(A, senses, rhs, c) -> Ilp01:
    rows = [
        Row(tuple((j, float(a)) for j, a in enumerate(r) if a), SENSES[s], float(b), f"r{i}")
        for i, (r, s, b) in enumerate(zip(A, senses, rhs))
    ]
    return Ilp01.from_rows(len(c), rows, [float(x) for x in c])


def random_lp(rng, n=6, m=4, eq_prob=0.15):
    A = rng.integers(-2, 3, size=(m, n))
    senses = [("=" if rng.random() < eq_prob else rng.choice(["<=", ">="])) for _ in range(m)]
    x0 = rng.random(n)
    rhs = []
    for i, s in enumerate(senses):
        act = A[i] @ x0
        # mostly feasible around a random box point, sometimes not
        shift = rng.integers(-1, 3) if s != "=" else 0
        if s == "<=":
            rhs.append(float(np.floor(act) + shift))
        elif s == ">=":
            rhs.append(float(np.ceil(act) - shift))
        else:
            rhs.append(float(np.round(act)))
    c = rng.integers(-3, 4, size=n)
    return A, senses, rhs, c
