"""Full-dimensional lattice polytopes in Z^d.

A ``LatticePolytope`` carries its vertices and the primitive facet height
functions ``ht_F(x) = alpha . x + beta``.  Every derived quantity (lattice
points, widths, heights over the polytope, strata, volumes) is computed in
exact integer arithmetic from those two lists.
"""

from __future__ import annotations

import json
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .enumeration import Scanner, System, evaluate, region_scanner, to_array
from .hull import DimensionError, polytope_hull
from .linalg import LatticeVector, affine_rank, determinant, dot

__all__ = [
    "DimensionError", "FacetForm", "LatticePolytope", "Stratum", "FormatError",
    "convex_hull", "lattice_points", "lattice_points_dilated", "contains",
    "height_over_polytope", "visible_facets", "width_facet", "width",
    "stratum", "normalized_volume", "facet_multiplicity", "placing_triangulation_points",
    "parse_text", "format_text", "parse_json", "format_json",
]


class FacetForm(NamedTuple):
    alpha: LatticeVector
    beta: int

    def __call__(self, x: Sequence[int]) -> int:
        return dot(self.alpha, x) + self.beta


class Stratum(NamedTuple):
    j: int
    points: list[LatticeVector]


class LatticePolytope:
    """Immutable full-dimensional lattice polytope.

    Build instances with :func:`convex_hull`; the constructor trusts its
    arguments.  Caches are filled lazily and never change afterwards.
    """

    def __init__(self, vertices: Sequence[LatticeVector], facets: Sequence[FacetForm]):
        self.vertices: tuple[LatticeVector, ...] = tuple(sorted(vertices))
        self.facets: tuple[FacetForm, ...] = tuple(sorted(facets))
        self.dim = len(self.vertices[0])

    def __repr__(self) -> str:
        return f"LatticePolytope(dim={self.dim}, vertices={list(self.vertices)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticePolytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    @cached_property
    def system(self) -> System:
        return System([f.alpha for f in self.facets], [f.beta for f in self.facets])

    @cached_property
    def scanner(self) -> Scanner:
        return Scanner.from_vertices(self.vertices, self.system)

    @cached_property
    def points(self) -> np.ndarray:
        """Lattice points as a lexicographically sorted integer array."""
        return self.scanner.points()

    @cached_property
    def widths(self) -> tuple[int, ...]:
        V = to_array(self.vertices)
        H = evaluate(self.system.A, self.system.c, V)
        return tuple(int(x) for x in H.max(axis=0))

    @cached_property
    def volume(self) -> int:
        simplices = placing_triangulation_points(self.vertices)
        return sum(_simplex_volume([self.vertices[i] for i in s]) for s in simplices)

    @cached_property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(_facet_multiplicity(self, f) for f in self.facets)

    def heights(self, X: np.ndarray) -> np.ndarray:
        """Matrix of facet heights ``ht_F(x)`` (rows: points, columns: facets)."""
        return evaluate(self.system.A, self.system.c, X)

    def facet_vertices(self, i: int) -> list[LatticeVector]:
        f = self.facets[i]
        return [v for v in self.vertices if f(v) == 0]

    def translate(self, t: Sequence[int]) -> "LatticePolytope":
        verts = [tuple(a + b for a, b in zip(v, t)) for v in self.vertices]
        facets = [FacetForm(f.alpha, f.beta - dot(f.alpha, t)) for f in self.facets]
        return LatticePolytope(verts, facets)

    def dilate(self, k: int) -> "LatticePolytope":
        verts = [tuple(k * x for x in v) for v in self.vertices]
        return LatticePolytope(verts, [FacetForm(f.alpha, k * f.beta) for f in self.facets])


def convex_hull(points: Iterable[Sequence[int]]) -> LatticePolytope:
    """Convex hull of a full-dimensional set of lattice points.

    Raises ``DimensionError`` (with ``.rank`` set to the dimension of the
    affine hull) when the points are not full-dimensional.
    """
    pts = [tuple(int(x) for x in p) for p in points]
    if not pts:
        raise DimensionError("no points given", -1)
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise ValueError("points of mixed dimension")
    if d == 1:
        xs = sorted(p[0] for p in pts)
        if xs[0] == xs[-1]:
            raise DimensionError("points span an affine space of dimension 0 < 1", 0)
        return LatticePolytope([(xs[0],), (xs[-1],)],
                               [FacetForm((-1,), xs[-1]), FacetForm((1,), -xs[0])])
    facets, vertices = polytope_hull(pts)
    return LatticePolytope(vertices, [FacetForm(a, b) for a, b in facets])


def lattice_points(P: LatticePolytope) -> list[LatticeVector]:
    return [tuple(int(x) for x in row) for row in P.points]


def lattice_points_dilated(P: LatticePolytope, k: int) -> list[LatticeVector]:
    if k < 1:
        raise ValueError("dilation factor must be positive")
    if k == 1:
        return lattice_points(P)
    return [tuple(int(x) for x in row) for row in P.scanner.scaled(k).points()]


def dilated_points(P: LatticePolytope, k: int) -> np.ndarray:
    return P.points if k == 1 else P.scanner.scaled(k).points()


def contains(P: LatticePolytope, x: Sequence[int], k: int = 1) -> bool:
    return all(dot(f.alpha, x) + k * f.beta >= 0 for f in P.facets)


def height_over_polytope(P: LatticePolytope, z: Sequence[int]) -> int:
    return max(0, max(-f(z) for f in P.facets))


def visible_facets(P: LatticePolytope, z: Sequence[int]) -> list[int]:
    return [i for i, f in enumerate(P.facets) if f(z) < 0]


def width_facet(P: LatticePolytope, i: int) -> int:
    return P.widths[i]


def width(P: LatticePolytope) -> int:
    return max(P.widths)


def relaxed_points(P: LatticePolytope, bounds: Sequence[int]) -> np.ndarray:
    """Lattice points with ``ht_F(x) >= -bounds[F]`` for every facet."""
    A = P.system.A
    c = [b + r for b, r in zip(P.system.c, bounds)]
    return region_scanner(A, c).points()


def stratum(P: LatticePolytope, j: int) -> Stratum:
    """Lattice points of height exactly ``j`` over ``P``."""
    if j < 1:
        raise ValueError("strata are indexed by positive heights")
    X = relaxed_points(P, [j] * len(P.facets))
    if len(X) == 0:
        return Stratum(j, [])
    H = P.heights(X)
    ht = (-H).max(axis=1)
    keep = X[ht == j]
    return Stratum(j, [tuple(int(x) for x in row) for row in keep])


def _simplex_volume(verts: Sequence[Sequence[int]]) -> int:
    v0 = verts[0]
    return abs(determinant([[a - b for a, b in zip(v, v0)] for v in verts[1:]]))


def _orientation(face: Sequence[Sequence[int]], p: Sequence[int]) -> int:
    v0 = face[0]
    rows = [[a - b for a, b in zip(v, v0)] for v in face[1:]]
    rows.append([a - b for a, b in zip(p, v0)])
    det = determinant(rows)
    return (det > 0) - (det < 0)


def placing_triangulation_points(points: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Placing triangulation of ``conv(points)`` in the given order.

    ``points`` must affinely span their ambient space.  The first affinely
    independent ``d+1`` points (greedily, in order) form the seed simplex,
    the rest are placed one by one.  Returns index tuples into ``points``.
    """
    pts = [tuple(p) for p in points]
    d = len(pts[0])
    seed = [0]
    for i in range(1, len(pts)):
        if affine_rank([pts[j] for j in seed] + [pts[i]]) == len(seed):
            seed.append(i)
            if len(seed) == d + 1:
                break
    if len(seed) < d + 1:
        raise DimensionError("points are not full-dimensional", len(seed) - 1)
    seed_t = tuple(seed)
    simplices = [seed_t]
    boundary: dict[frozenset, int] = {}
    for q in seed_t:
        boundary[frozenset(i for i in seed_t if i != q)] = q
    seed_set = set(seed_t)
    for p in range(len(pts)):
        if p in seed_set:
            continue
        visible = []
        for face, opp in boundary.items():
            fpts = [pts[i] for i in sorted(face)]
            op = _orientation(fpts, pts[p])
            if op != 0 and op != _orientation(fpts, pts[opp]):
                visible.append(face)
        if not visible:
            continue
        count: dict[frozenset, int] = {}
        for face in visible:
            del boundary[face]
            simplex = tuple(sorted(face | {p}))
            simplices.append(simplex)
            for q in face:
                sub = frozenset((face - {q}) | {p})
                if sub in count:
                    del count[sub]
                else:
                    count[sub] = q
        boundary.update(count)
    return simplices


def normalized_volume(P: LatticePolytope) -> int:
    return P.volume


def height_one_point(alpha: Sequence[int], beta: int) -> LatticeVector:
    """A lattice point ``u`` with ``alpha . u + beta = 1`` (alpha primitive)."""
    d = len(alpha)
    coef = [0] * d
    g = 0
    for i, a in enumerate(alpha):
        # invariant: sum(coef[j] * alpha[j] for j < i) == g
        if a == 0:
            continue
        if g == 0:
            g, coef[i] = abs(a), (1 if a > 0 else -1)
            continue
        g2, s, t = _ext_gcd(g, a)
        coef = [s * c for c in coef]
        coef[i] = t
        g = g2
    if g != 1:
        raise ValueError("facet normal is not primitive")
    return tuple((1 - beta) * c for c in coef)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def facet_chart(alpha: Sequence[int]) -> int:
    """Coordinate whose deletion maps ``Aff(F)`` injectively to R^(d-1)."""
    return next(i for i, a in enumerate(alpha) if a != 0)


def facet_triangulation(P: LatticePolytope, i: int) -> list[tuple[LatticeVector, ...]]:
    f = P.facets[i]
    verts = P.facet_vertices(i)
    drop = facet_chart(f.alpha)
    chart = [v[:drop] + v[drop + 1:] for v in verts]
    if len(chart[0]) == 0:
        return [tuple(verts)]
    return [tuple(verts[j] for j in s) for s in placing_triangulation_points(chart)]


def _facet_multiplicity(P: LatticePolytope, f: FacetForm) -> int:
    i = P.facets.index(f)
    u = height_one_point(f.alpha, f.beta)
    return sum(_simplex_volume(list(s) + [u]) for s in facet_triangulation(P, i))


def facet_multiplicity(P: LatticePolytope, i: int) -> int:
    return P.multiplicities[i]


# -- text / JSON exchange format -------------------------------------------

class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _int_token(tok: str, line: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"non-integer token {tok!r}", line) from None


def parse_text(text: str) -> list[LatticeVector]:
    lines = text.splitlines()
    if len(lines) < 2:
        raise FormatError("missing header", len(lines) + 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dim":
        raise FormatError("expected 'dim <d>'", 1)
    d = _int_token(head[1], 1)
    head = lines[1].split()
    if len(head) != 2 or head[0] != "vertices":
        raise FormatError("expected 'vertices <n>'", 2)
    n = _int_token(head[1], 2)
    if d < 1 or n < 1:
        raise FormatError("dimension and vertex count must be positive", 1 if d < 1 else 2)
    rows = []
    for k in range(n):
        lineno = k + 3
        if lineno > len(lines):
            raise FormatError(f"expected {n} vertex rows, found {k}", lineno)
        toks = lines[lineno - 1].split()
        if len(toks) != d:
            raise FormatError(f"expected {d} coordinates, found {len(toks)}", lineno)
        rows.append(tuple(_int_token(t, lineno) for t in toks))
    for extra in range(n + 2, len(lines)):
        if lines[extra].strip():
            raise FormatError("trailing content after vertex rows", extra + 1)
    return rows


def format_text(vertices: Sequence[Sequence[int]]) -> str:
    verts = [tuple(v) for v in vertices]
    out = [f"dim {len(verts[0])}", f"vertices {len(verts)}"]
    out += [" ".join(str(x) for x in v) for v in verts]
    return "\n".join(out) + "\n"


def parse_json(text: str) -> list[LatticeVector]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno) from None
    if not isinstance(data, dict) or "dim" not in data or "vertices" not in data:
        raise FormatError("expected an object with 'dim' and 'vertices'")
    d = data["dim"]
    rows = []
    for k, v in enumerate(data["vertices"]):
        if not isinstance(v, list) or len(v) != d or not all(isinstance(x, int) for x in v):
            raise FormatError(f"vertex {k} is not a list of {d} integers")
        rows.append(tuple(v))
    return rows


def format_json(vertices: Sequence[Sequence[int]]) -> str:
    verts = [list(v) for v in vertices]
    return json.dumps({"dim": len(verts[0]), "vertices": verts}) + "\n"
