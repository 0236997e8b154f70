"""Simplicial cones, parallelotope points and the normality test."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import IntMatrix, LatticeVector, SingularMatrixError, adjugate, primitive, smith_normal_form, transpose
from .polytope import LatticePolytope, dilated_points, facet_triangulation

__all__ = [
    "SimplicialConeData", "NormalityVerdict", "lpar", "cone_facet_forms",
    "lpar_height_census", "is_normal", "is_normal_bruteforce", "placing_triangulation",
    "homogenize",
]


def homogenize(v: Sequence[int]) -> LatticeVector:
    return tuple(v) + (1,)


@dataclass(frozen=True)
class SimplicialConeData:
    generators: IntMatrix  # columns are the generators
    index: int
    lpar_points: list[LatticeVector]

    @property
    def degrees(self) -> list[int]:
        """Last coordinates of the parallelotope points (homogenized input)."""
        return [p[-1] for p in self.lpar_points]


class NormalityVerdict(NamedTuple):
    is_normal: bool
    witness: tuple[int, LatticeVector] | None = None


def lpar(generators: Sequence[Sequence[int]]) -> SimplicialConeData:
    """Lattice points of the semi-open parallelotope spanned by ``generators``.

    Residues of ``Z^n`` modulo the generated sublattice are read off the
    Smith form (``U G V = D``: representatives ``U^-1 r`` for ``r`` in the
    box of the diagonal) and pushed into ``[0,1)`` coordinates.
    """
    gens = [tuple(int(x) for x in g) for g in generators]
    n = len(gens)
    if any(len(g) != n for g in gens):
        raise ValueError("need n generators in Z^n")
    G = transpose(gens)
    try:
        adj, det = adjugate(G)
    except SingularMatrixError:
        raise SingularMatrixError("generators are linearly dependent") from None
    D, U, _ = smith_normal_form(G)
    Uadj, udet = adjugate(U)  # udet is +-1
    Uinv = tuple(tuple(udet * x for x in row) for row in Uadj)
    diag = [D[i][i] for i in range(n)]
    # all residue vectors r with 0 <= r_i < d_i
    grids = np.meshgrid(*[np.arange(d, dtype=np.int64) for d in diag], indexing="ij")
    R = np.stack([g.ravel() for g in grids], axis=1).astype(object)
    reps = R @ np.array(Uinv, dtype=object).T
    sgn = 1 if det > 0 else -1
    num = (reps @ np.array(adj, dtype=object).T) * sgn
    frac = num % abs(det)
    pts = (frac @ np.array(G, dtype=object).T) // abs(det)
    points = sorted(tuple(int(x) for x in row) for row in pts)
    return SimplicialConeData(G, abs(det), points)


def cone_facet_forms(data: SimplicialConeData) -> list[LatticeVector]:
    """Primitive linear forms; form ``i`` vanishes on every generator but ``i``."""
    adj, det = adjugate(data.generators)
    forms = []
    for row in adj:
        f = primitive(row)
        forms.append(f if det > 0 else tuple(-x for x in f))
    return forms


def lpar_height_census(data: SimplicialConeData, form: Sequence[int]) -> dict[int, int]:
    counts = Counter(sum(a * x for a, x in zip(form, p)) for p in data.lpar_points)
    return dict(sorted(counts.items()))


def _sumset_cover(A: np.ndarray, B: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Boolean mask: which rows of X lie in A + B (all integer arrays)."""
    if len(X) == 0:
        return np.zeros(0, dtype=bool)
    if len(A) == 0 or len(B) == 0:
        return np.zeros(len(X), dtype=bool)
    lo = np.minimum(X.min(axis=0), (A.min(axis=0) + B.min(axis=0)))
    hi = np.maximum(X.max(axis=0), (A.max(axis=0) + B.max(axis=0)))
    span = [int(h - l) + 1 for l, h in zip(lo, hi)]
    total = 1
    for s in span:
        total *= s
    if X.dtype == object or total >= 1 << 62:
        sums = {tuple(int(u) for u in a + b) for a in A for b in B}
        return np.array([tuple(int(u) for u in x) in sums for x in X], dtype=bool)
    strides = np.ones(len(span), dtype=np.int64)
    for i in range(len(span) - 2, -1, -1):
        strides[i] = strides[i + 1] * span[i + 1]
    # linear keys are injective on the box, and key(a) + key(b) = key(a + b)
    ka = (A - lo) @ strides
    kb = B @ strides
    kx = (X - lo) @ strides
    step = max(1, (1 << 22) // max(1, len(kb)))
    sums = np.unique(np.concatenate([(ka[i:i + step, None] + kb[None, :]).ravel()
                                     for i in range(0, len(ka), step)]))
    return np.isin(kx, sums)


def is_normal(P: LatticePolytope) -> NormalityVerdict:
    """Normality test capped at degree ``d - 1``.

    For ``k = 2, ..., d-1`` every point of ``L(kP)`` must split as a point
    of ``L(P)`` plus a point of ``L((k-1)P)``.  Assuming the lower degrees
    passed, that is exactly the k-fold sumset condition.  Returns the
    lexicographically least failing point of the lowest failing degree.
    """
    d = P.dim
    if d <= 2:
        return NormalityVerdict(True)
    base = P.points
    prev = base
    for k in range(2, d):
        X = dilated_points(P, k)
        ok = _sumset_cover(base, prev, X)
        if not ok.all():
            i = int(np.argmin(ok))
            return NormalityVerdict(False, (k, tuple(int(x) for x in X[i])))
        prev = X
    return NormalityVerdict(True)


def is_normal_bruteforce(P: LatticePolytope, kmax: int) -> NormalityVerdict:
    """Literal comparison of ``L(cP)`` with the c-fold sumset, ``c <= kmax``."""
    base = [tuple(int(x) for x in p) for p in P.points]
    sums = set(base)
    for c in range(2, kmax + 1):
        sums = {tuple(a + b for a, b in zip(s, p)) for s in sums for p in base}
        target = [tuple(int(x) for x in p) for p in dilated_points(P, c)]
        missing = sorted(set(target) - sums)
        if missing:
            return NormalityVerdict(False, (c, missing[0]))
    return NormalityVerdict(True)


def placing_triangulation(P: LatticePolytope, facet: int) -> list[tuple[LatticeVector, ...]]:
    """Placing triangulation of a facet, vertices placed in stored order."""
    return facet_triangulation(P, facet)
