"""Double description method over the integers.

``cone_facets`` computes the facet normals of a full-dimensional pointed
cone from a list of generators.  By duality the same routine turns an
inequality system into the extreme rays of the cone it cuts out, which is
how vertices of rational polyhedra are found.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

from .linalg import adjugate, dot, primitive


class DimensionError(ValueError):
    """Raised when the input does not span the ambient space."""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


def _independent_subset(gens: Sequence[Sequence[int]]) -> list[int]:
    """Indices of a greedily chosen maximal linearly independent subset."""
    n = len(gens[0])
    basis: list[list[Fraction]] = []  # echelon rows
    pivots: list[int] = []
    chosen: list[int] = []
    for idx, g in enumerate(gens):
        v = [Fraction(x) for x in g]
        for row, p in zip(basis, pivots):
            if v[p] != 0:
                f = v[p] / row[p]
                v = [a - f * b for a, b in zip(v, row)]
        p = next((i for i, x in enumerate(v) if x != 0), None)
        if p is None:
            continue
        basis.append(v)
        pivots.append(p)
        chosen.append(idx)
        if len(chosen) == n:
            break
    return chosen


def cone_facets(gens: Sequence[Sequence[int]]) -> tuple[list[tuple[int, ...]], list[int]]:
    """Facets of the cone spanned by ``gens``.

    Returns the primitive inward normals ``a`` (``a . g >= 0`` for every
    generator) and, for each normal, a bitmask over generator indices
    marking the generators on that facet.  Raises ``DimensionError`` if the
    generators do not span the whole space.
    """
    gens = [tuple(int(x) for x in g) for g in gens]
    n = len(gens[0])
    basis = _independent_subset(gens)
    if len(basis) < n:
        raise DimensionError(f"generators span a subspace of rank {len(basis)} < {n}",
                             len(basis))

    B = [gens[i] for i in basis]
    adj, det = adjugate(B)
    # column j of adj is orthogonal to every basis row except row j
    normals: list[tuple[int, ...]] = []
    inc: list[int] = []
    full = 0
    for i in basis:
        full |= 1 << i
    for j in range(n):
        col = tuple(adj[r][j] for r in range(n))
        if det < 0:
            col = tuple(-x for x in col)
        normals.append(primitive(col))
        inc.append(full & ~(1 << basis[j]))

    in_basis = set(basis)
    for t, g in enumerate(gens):
        if t in in_basis:
            continue
        vals = [dot(a, g) for a in normals]
        neg = [i for i, v in enumerate(vals) if v < 0]
        bit = 1 << t
        if not neg:
            for i, v in enumerate(vals):
                if v == 0:
                    inc[i] |= bit
            continue
        pos = [i for i, v in enumerate(vals) if v > 0]
        new_normals: list[tuple[int, ...]] = []
        new_inc: list[int] = []
        nf = len(normals)
        for p in pos:
            ip = inc[p]
            for q in neg:
                z = ip & inc[q]
                if z.bit_count() < n - 2:
                    continue
                adjacent = True
                for r in range(nf):
                    if r != p and r != q and (z & ~inc[r]) == 0:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vq = vals[p], vals[q]
                a = tuple(vp * x - vq * y for x, y in zip(normals[q], normals[p]))
                new_normals.append(primitive(a))
                new_inc.append(z | bit)
        keep = [i for i, v in enumerate(vals) if v >= 0]
        normals = [normals[i] for i in keep] + new_normals
        inc = [inc[i] | (bit if vals[i] == 0 else 0) for i in keep] + new_inc
    return normals, inc


def _order_for_hull(points: Sequence[Sequence[int]]) -> list[int]:
    # far-from-centroid points first: most later points are then interior
    # and cost a single evaluation pass
    d = len(points[0])
    m = len(points)
    centroid = [sum(p[i] for p in points) / m for i in range(d)]
    key = [sum((p[i] - centroid[i]) ** 2 for i in range(d)) for p in points]
    return sorted(range(m), key=lambda i: (-key[i], points[i]))


def polytope_hull(points: Sequence[Sequence[int]]):
    """Facets and vertices of ``conv(points)`` for integer points.

    Returns ``(facets, vertices)`` where each facet is ``(alpha, beta)``
    with ``alpha . x + beta >= 0`` on the hull; ``alpha`` is primitive.
    Vertices are returned as tuples, facets and vertices sorted.
    """
    pts = sorted(set(tuple(int(x) for x in p) for p in points))
    if not pts:
        raise DimensionError("empty point set", -1)
    d = len(pts[0])
    order = _order_for_hull(pts)
    ordered = [pts[i] for i in order]
    gens = [p + (1,) for p in ordered]
    try:
        normals, inc = cone_facets(gens)
    except DimensionError as exc:
        raise DimensionError(f"points span an affine space of dimension {exc.rank - 1} < {d}",
                             exc.rank - 1) from None

    facets = []
    for a in normals:
        alpha, beta = a[:d], a[d]
        g = 0
        for x in alpha:
            g = gcd(g, x)
        facets.append((tuple(x // g for x in alpha), beta // g))

    # a point is a vertex unless another point lies on every facet through it
    on = [0] * len(gens)
    for fi, mask in enumerate(inc):
        m = mask
        while m:
            low = m & -m
            on[low.bit_length() - 1] |= 1 << fi
            m ^= low
    boundary = [i for i in range(len(gens)) if on[i].bit_count() >= d]
    vertices = []
    for i in boundary:
        si = on[i]
        if not any(j != i and (si & ~on[j]) == 0 for j in boundary):
            vertices.append(ordered[i])
    return sorted(facets), sorted(vertices)


def polyhedron_vertices(A: Sequence[Sequence[int]], b: Sequence[int]) -> list[tuple[Fraction, ...]]:
    """Vertices of the bounded full-dimensional polytope ``A x + b >= 0``."""
    d = len(A[0])
    rows = [tuple(a) + (bi,) for a, bi in zip(A, b)]
    rows.append((0,) * d + (1,))
    try:
        rays, _ = cone_facets(rows)
    except DimensionError as exc:
        raise DimensionError("inequality system is unbounded", exc.rank) from None
    verts = []
    for r in rays:
        s = r[d]
        if s <= 0:
            raise DimensionError("inequality system is unbounded", d)
        verts.append(tuple(Fraction(x, s) for x in r[:d]))
    return sorted(set(verts))
