"""Lattice point enumeration in bounded polyhedra.

A polytope is scanned coordinate by coordinate.  For the prefix
``(x_1, ..., x_k)`` the admissible range of ``x_{k+1}`` is read off the
inequality description of the projection onto the first ``k+1``
coordinates, so no box is ever scanned blindly.  Prefix blocks are
expanded with numpy; every comparison is done on exact integers (int64
when a magnitude bound proves it safe, Python ints otherwise).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterator, Sequence

import numpy as np

from .hull import polyhedron_vertices, polytope_hull

INT64_SAFE = 1 << 62


class System:
    """Integer inequality system ``A x + c >= 0``."""

    __slots__ = ("A", "c")

    def __init__(self, A: Sequence[Sequence[int]], c: Sequence[int]):
        self.A = [tuple(int(x) for x in row) for row in A]
        self.c = [int(x) for x in c]

    @property
    def dim(self) -> int:
        return len(self.A[0])

    def scaled(self, k: int) -> "System":
        return System(self.A, [k * x for x in self.c])

    def shifted(self, t: Sequence[int]) -> "System":
        # system satisfied by x + t whenever the original holds at x
        return System(self.A, [c - sum(a * s for a, s in zip(row, t))
                               for row, c in zip(self.A, self.c)])


def _max_abs(values) -> int:
    m = 0
    for v in values:
        v = abs(int(v))
        if v > m:
            m = v
    return m


def to_array(points) -> np.ndarray:
    """Integer array of points; int64 when safe, Python ints otherwise."""
    if isinstance(points, np.ndarray) and points.dtype != object:
        return points
    pts = [tuple(int(x) for x in p) for p in points]
    if not pts:
        return np.zeros((0, 0), dtype=np.int64)
    if _max_abs(x for p in pts for x in p) < INT64_SAFE >> 20:
        return np.array(pts, dtype=np.int64)
    return np.array(pts, dtype=object)


def evaluate(A: Sequence[Sequence[int]], c: Sequence[int], X: np.ndarray) -> np.ndarray:
    """``X @ A.T + c`` computed exactly."""
    if len(X) == 0:
        return np.zeros((0, len(A)), dtype=np.int64)
    amax = _max_abs(x for row in A for x in row)
    cmax = _max_abs(c)
    xmax = int(np.abs(X).max()) if X.dtype != object else _max_abs(X.ravel())
    bound = len(A[0]) * amax * xmax + cmax
    if bound < INT64_SAFE and X.dtype != object:
        At = np.array(A, dtype=np.int64).T
        return X @ At + np.array(c, dtype=np.int64)
    At = np.array(A, dtype=object).T
    return X.astype(object) @ At + np.array(c, dtype=object)


def projection_systems(vertices: Sequence[Sequence]) -> list[System]:
    """Inequalities of the projections onto the first k coordinates, k < d.

    ``vertices`` may be rational; they are cleared to a common denominator
    before hulling and the denominator is folded into the coefficients.
    """
    d = len(vertices[0])
    den = 1
    for v in vertices:
        for x in v:
            if isinstance(x, Fraction):
                den = lcm(den, x.denominator)
    pts = [tuple(int(x * den) for x in v) for v in vertices]
    systems = []
    for k in range(1, d):
        proj = sorted(set(p[:k] for p in pts))
        if k == 1:
            lo, hi = proj[0][0], proj[-1][0]
            A, c = [(den,), (-den,)], [-lo, hi]
        else:
            facets, _ = polytope_hull(proj)
            A, c = [], []
            for alpha, beta in facets:
                row = [den * a for a in alpha]
                g = gcd(*row, beta)
                A.append(tuple(a // g for a in row))
                c.append(beta // g)
        systems.append(System(A, c))
    return systems


class Scanner:
    """Enumerates the lattice points of a bounded polytope.

    ``levels`` are the projection systems for k = 1..d-1 and ``final`` the
    system of the polytope itself.
    """

    def __init__(self, levels: list[System], final: System):
        self.levels = list(levels) + [final]
        self.d = final.dim

    @classmethod
    def from_vertices(cls, vertices, final: System) -> "Scanner":
        return cls(projection_systems(vertices), final)

    @classmethod
    def from_system(cls, final: System) -> "Scanner":
        verts = polyhedron_vertices(final.A, final.c)
        return cls(projection_systems(verts), final)

    def scaled(self, k: int) -> "Scanner":
        return Scanner([s.scaled(k) for s in self.levels[:-1]], self.levels[-1].scaled(k))

    def _bounds(self, X: np.ndarray, sysk: System):
        k = X.shape[1]
        A = sysk.A
        pos = [i for i, row in enumerate(A) if row[k] > 0]
        neg = [i for i, row in enumerate(A) if row[k] < 0]
        if k == 0:
            s = np.tile(np.array(sysk.c, dtype=object), (len(X), 1))
        else:
            s = evaluate([row[:k] for row in A], sysk.c, X)
        coef = [row[k] for row in A]
        if s.dtype == object:
            lo = np.array([max(-(int(r[i]) // coef[i]) for i in pos) for r in s], dtype=object)
            hi = np.array([min(int(r[i]) // -coef[i] for i in neg) for r in s], dtype=object)
            if len(X) and _max_abs(list(lo) + list(hi)) < INT64_SAFE >> 20:
                lo, hi = lo.astype(np.int64), hi.astype(np.int64)
            return lo, hi
        cp = np.array([coef[i] for i in pos], dtype=np.int64)
        cn = np.array([-coef[i] for i in neg], dtype=np.int64)
        lo = (-(s[:, pos] // cp)).max(axis=1)
        hi = (s[:, neg] // cn).min(axis=1)
        return lo, hi

    @staticmethod
    def _expand(X: np.ndarray, lo, hi, counts) -> np.ndarray:
        total = int(counts.sum())
        if total == 0:
            return np.zeros((0, X.shape[1] + 1), dtype=X.dtype)
        rep = np.repeat(np.arange(len(X)), counts)
        starts = np.cumsum(counts) - counts
        offs = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
        col = np.asarray(lo)[rep] + offs
        out_dtype = object if (X.dtype == object or col.dtype == object) else np.int64
        return np.column_stack([X[rep].astype(out_dtype), col.astype(out_dtype)])

    def blocks(self, max_rows: int = 1 << 20) -> Iterator[np.ndarray]:
        """Yield the lattice points in lexicographic order, block by block."""
        yield from self._walk(np.zeros((1, 0), dtype=np.int64), 0, max_rows)

    def _walk(self, X: np.ndarray, level: int, max_rows: int):
        lo, hi = self._bounds(X, self.levels[level])
        counts = np.maximum(np.asarray(hi - lo + 1).astype(np.int64), 0)
        # split prefixes so that no expansion exceeds max_rows
        cum = np.cumsum(counts)
        start = 0
        n = len(X)
        while start < n:
            base = cum[start - 1] if start else 0
            stop = int(np.searchsorted(cum, base + max_rows, side="right"))
            stop = max(stop, start + 1)
            Y = self._expand(X[start:stop], lo[start:stop], hi[start:stop], counts[start:stop])
            if len(Y):
                if level == self.d - 1:
                    yield Y
                else:
                    yield from self._walk(Y, level + 1, max_rows)
            start = stop

    def points(self) -> np.ndarray:
        parts = list(self.blocks())
        if not parts:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.concatenate(parts) if len(parts) > 1 else parts[0]


def region_scanner(A: Sequence[Sequence[int]], c: Sequence[int]) -> Scanner:
    return Scanner.from_system(System(A, c))


def lex_keys(X: np.ndarray, lo: Sequence[int], width: Sequence[int]) -> np.ndarray:
    """Injective integer keys on the box ``lo + [0, width)``, order preserving."""
    key = np.zeros(len(X), dtype=np.int64)
    for i in range(X.shape[1]):
        key = key * int(width[i]) + (X[:, i] - int(lo[i]))
    return key
