"""Explicit polytopes used as fixtures and demonstrations."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from math import gcd, isqrt, lcm
from typing import Sequence

import numpy as np

from .cone import _sumset_cover
from .enumeration import INT64_SAFE
from .hull import DimensionError
from .linalg import LatticeVector, SingularMatrixError, _inverse_fractions, as_matrix, determinant
from .polytope import LatticePolytope, convex_hull, dilated_points, lattice_points
from .jumps import height1_jumps

__all__ = [
    "cross_polytope", "cross_polytope_jump_point", "sharp_pair", "dark_vertex_polygon",
    "is_dark_vertex", "empty_simplex", "EllipsoidSpec", "ball", "ellipsoid_points",
    "ellipsoid_hull", "two_point_decomposition_check", "maximal_polytope",
    "maximal_polytope_record", "order_gap_example", "order_gap_removal", "unit_cube", "unit_simplex",
]


def unit_simplex(d: int) -> LatticePolytope:
    pts = [(0,) * d] + [tuple(int(i == j) for j in range(d)) for i in range(d)]
    return convex_hull(pts)


def unit_cube(d: int) -> LatticePolytope:
    pts = [tuple((m >> i) & 1 for i in range(d)) for m in range(1 << d)]
    return convex_hull(pts)


def cross_polytope(k: int) -> LatticePolytope:
    """``conv(+-k e1, +-(k+1) e2, +-(k^2+k+1) e3)``."""
    if k < 1:
        raise ValueError("k must be positive")
    a, b, c = k, k + 1, k * k + k + 1
    return convex_hull([(a, 0, 0), (-a, 0, 0), (0, b, 0), (0, -b, 0), (0, 0, c), (0, 0, -c)])


def cross_polytope_jump_point(k: int) -> LatticeVector:
    if k < 1:
        raise ValueError("k must be positive")
    return (0, 1, k * k + 1)


def sharp_pair(d: int, w: int) -> tuple[LatticePolytope, LatticeVector]:
    """Simplex ``conv(0, e1, ..., e_{d-1}, -w e_d)`` and a jump of height ``(d-2)w + 1``."""
    if d < 3:
        raise ValueError("sharp_pair needs d >= 3")
    if w < 1:
        raise ValueError("w must be positive")
    pts = [(0,) * d] + [tuple(int(i == j) for j in range(d)) for i in range(d - 1)]
    pts.append((0,) * (d - 1) + (-w,))
    return convex_hull(pts), (1,) * (d - 1) + ((d - 2) * w + 1,)


def dark_vertex_polygon() -> LatticePolytope:
    return convex_hull([(0, 0), (0, 1), (1, 0), (5, 1), (1, 5)])


def is_dark_vertex(P: LatticePolytope, v: Sequence[int]) -> bool:
    """True if no jump over the polygon ``P`` sees the vertex ``v``.

    Jumps over polygons are exactly the height-1 points, and ``v`` is seen
    from ``z`` when some edge through ``v`` is visible from ``z``.
    """
    if P.dim != 2:
        raise ValueError("dark vertices are defined for polygons")
    v = tuple(v)
    if v not in P.vertices:
        raise ValueError(f"{v} is not a vertex")
    through = [f for f in P.facets if f(v) == 0]
    return not any(f(z) < 0 for z in height1_jumps(P) for f in through)


def empty_simplex(p: int, q: int) -> LatticePolytope:
    """``conv(0, e1, e3, q e1 + p e2 + e3)``, empty for coprime ``1 <= q < p``."""
    if not (1 <= q <= p - 1) or gcd(p, q) != 1:
        raise ValueError("need 1 <= q <= p-1 with gcd(p, q) = 1")
    return convex_hull([(0, 0, 0), (1, 0, 0), (0, 0, 1), (q, p, 1)])


@dataclass(frozen=True)
class EllipsoidSpec:
    """``sum_i (l_i(x) - z_i)^2 <= 1`` for rational forms ``l_i`` and center ``z``."""

    forms: tuple[tuple[Fraction, ...], ...]
    center: tuple[Fraction, ...]

    def __post_init__(self):
        forms = tuple(tuple(Fraction(x) for x in row) for row in self.forms)
        center = tuple(Fraction(x) for x in self.center)
        d = len(forms)
        if any(len(r) != d for r in forms) or len(center) != d:
            raise ValueError("need d forms in d variables and a center in Q^d")
        object.__setattr__(self, "forms", forms)
        object.__setattr__(self, "center", center)
        den = self.denominator
        if determinant([[int(x * den) for x in r] for r in forms]) == 0:
            raise SingularMatrixError("forms are linearly dependent")

    @property
    def d(self) -> int:
        return len(self.forms)

    @property
    def denominator(self) -> int:
        den = 1
        for x in [x for r in self.forms for x in r] + list(self.center):
            den = lcm(den, x.denominator)
        return den

    @classmethod
    def axis_aligned(cls, semiaxes: Sequence, center: Sequence = None) -> "EllipsoidSpec":
        d = len(semiaxes)
        forms = [[Fraction(int(i == j)) / Fraction(semiaxes[i]) for j in range(d)] for i in range(d)]
        c = [Fraction(0)] * d if center is None else [Fraction(x) for x in center]
        # center given in x-coordinates, the spec stores it in form coordinates
        z = [sum(f * x for f, x in zip(row, c)) for row in forms]
        return cls(tuple(map(tuple, forms)), tuple(z))


def ball(d: int, r) -> EllipsoidSpec:
    return EllipsoidSpec.axis_aligned([Fraction(r)] * d)


def ellipsoid_points(spec: EllipsoidSpec) -> np.ndarray:
    """All lattice points of the ellipsoid, exact, in lexicographic order."""
    d, den = spec.d, spec.denominator
    L = [[int(x * den) for x in r] for r in spec.forms]  # den * l_i
    z = [int(x * den) for x in spec.center]
    Linv = _inverse_fractions(as_matrix(L))  # x = Linv (u + z), |u| <= den
    c = [sum(a * b for a, b in zip(row, z)) for row in Linv]
    lo, hi = [], []
    for row, cj in zip(Linv, c):
        n2 = sum(a * a for a in row) * den * den
        r = isqrt(int(n2.numerator // n2.denominator)) + 1
        lo.append(int(np.floor(float(cj))) - r - 1)
        hi.append(int(np.ceil(float(cj))) + r + 1)
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    X = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    big = max(abs(v) for v in lo + hi) * d * max(abs(x) for r in L for x in r) + max(map(abs, z))
    dtype = np.int64 if big * big * d < INT64_SAFE else object
    U = X.astype(dtype) @ np.array(L, dtype=dtype).T - np.array(z, dtype=dtype)
    keep = (U * U).sum(axis=1) <= den * den
    return X[keep]


def ellipsoid_hull(spec: EllipsoidSpec) -> LatticePolytope:
    pts = ellipsoid_points(spec)
    if len(pts) == 0:
        raise DimensionError("ellipsoid contains no lattice points", -1)
    return convex_hull([tuple(int(x) for x in p) for p in pts])


def two_point_decomposition_check(spec: EllipsoidSpec, P: LatticePolytope) -> bool:
    """Every point of ``L(2P)`` is a sum of two points of ``L(P)``."""
    base = P.points
    return bool(_sumset_cover(base, base, dilated_points(P, 2)).all())


def _maximal_data() -> dict:
    text = resources.files("npol").joinpath("data/maximal_polytopes.json").read_text()
    return json.loads(text)


def maximal_polytope_record(name: str) -> dict:
    data = _maximal_data()
    if name not in data:
        raise KeyError(f"unknown polytope {name!r}; choose from {sorted(data)}")
    return data[name]


def maximal_polytope(name: str) -> LatticePolytope:
    """One of ``P4``, ``P5``, ``P4prime``: maximal normal polytopes."""
    rec = maximal_polytope_record(name)
    return convex_hull([tuple(v) for v in rec["vertices"]])


ORDER_GAP_VERTICES = [(0, 0, 2), (0, 0, 1), (0, 1, 3), (1, 0, 0), (2, 1, 2), (1, 2, 1)]


def order_gap_example() -> tuple[LatticePolytope, LatticePolytope]:
    """``(P, Q)`` with ``Q`` the hull of ``L(P)`` minus its first two listed vertices."""
    P = convex_hull(ORDER_GAP_VERTICES)
    drop = set(ORDER_GAP_VERTICES[:2])
    Q = convex_hull([p for p in lattice_points(P) if p not in drop])
    return P, Q


def order_gap_removal(i: int) -> LatticePolytope:
    """Hull of ``L(P)`` without the ``i``-th listed vertex (``i`` in 0, 1)."""
    P = convex_hull(ORDER_GAP_VERTICES)
    v = ORDER_GAP_VERTICES[i]
    return convex_hull([p for p in lattice_points(P) if p != v])
