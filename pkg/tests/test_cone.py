import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npol import gallery
from npol.cone import (
    cone_facet_forms, is_normal, is_normal_bruteforce, lpar, lpar_height_census, placing_triangulation,
)
from npol.linalg import SingularMatrixError, determinant, solve_rational, transpose
from npol.polytope import convex_hull, dilated_points, lattice_points

from helpers import random_normal_polytopes, random_polytope

square = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n))


def _lpar_bruteforce(gens):
    """Box scan of the semi-open parallelotope (small inputs only)."""
    n = len(gens)
    corners = [[sum(g[i] for g, b in zip(gens, mask) if b) for i in range(n)]
               for mask in itertools.product((0, 1), repeat=n)]
    lo = np.min(corners, axis=0)
    hi = np.max(corners, axis=0)
    G = transpose(gens)
    out = []
    for x in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        c = solve_rational(G, x)
        if all(0 <= t < 1 for t in c):
            out.append(tuple(x))
    return sorted(out)


@given(square)
@settings(max_examples=150, deadline=None)
def test_lpar_count_and_coordinates(gens):
    if determinant(gens) == 0:
        with pytest.raises(SingularMatrixError):
            lpar(gens)
        return
    data = lpar(gens)
    assert len(data.lpar_points) == abs(determinant(gens)) == data.index
    G = transpose(gens)
    for p in data.lpar_points:
        assert all(0 <= Fraction(t) < 1 for t in solve_rational(G, p))
    assert len(set(data.lpar_points)) == data.index


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_lpar_matches_box_scan(gens):
    if determinant(gens) == 0:
        return
    assert lpar(gens).lpar_points == _lpar_bruteforce(gens)


def test_lpar_unimodular_and_empty_simplex():
    assert lpar([(1, 0, 0), (0, 1, 0), (0, 0, 1)]).lpar_points == [(0, 0, 0)]
    E = gallery.empty_simplex(3, 2)
    data = lpar([v + (1,) for v in E.vertices])
    assert data.index == 3
    assert sorted(data.degrees) == [0, 2, 2]


@given(square)
@settings(max_examples=100, deadline=None)
def test_height_census(gens):
    """Each facet of the cone sees mu(F) points on every height 0..ht(v)-1."""
    if determinant(gens) == 0:
        return
    data = lpar(gens)
    forms = cone_facet_forms(data)
    for i, f in enumerate(forms):
        h = sum(a * b for a, b in zip(f, gens[i]))
        assert h > 0
        census = lpar_height_census(data, f)
        assert sorted(census) == list(range(h))
        assert len(set(census.values())) == 1
        assert census[0] * h == data.index


def test_census_for_sharp_cone():
    # cone over a unimodular facet with apex of height 4: one point per height
    P, z = gallery.sharp_pair(4, 2)
    gens = [(0, 0, 0, 0, 1), (1, 0, 0, 0, 1), (0, 1, 0, 0, 1), (0, 0, 1, 0, 1), z + (1,)]
    data = lpar(gens)
    f = cone_facet_forms(data)[-1]
    assert lpar_height_census(data, f) == {j: 1 for j in range(5)}


@pytest.mark.parametrize("p,q", [(p, q) for p in range(2, 8) for q in range(1, p) if np.gcd(p, q) == 1])
def test_empty_simplex_degrees(p, q):
    E = gallery.empty_simplex(p, q)
    assert len(lattice_points(E)) == 4
    degrees = lpar([v + (1,) for v in E.vertices]).degrees
    assert sorted(degrees) == [0] + [2] * (p - 1)


def _check_witness(P, verdict):
    k, x = verdict.witness
    assert x in {tuple(int(t) for t in r) for r in dilated_points(P, k)}
    prev = {tuple(int(t) for t in r) for r in dilated_points(P, k - 1)}
    for p in lattice_points(P):
        assert tuple(a - b for a, b in zip(x, p)) not in prev


def test_normality_small_oracle():
    rng = np.random.default_rng(3)
    seen = {True: 0, False: 0}
    while sum(seen.values()) < 60:
        P = random_polytope(rng, 3, int(rng.integers(4, 7)), 3)
        if P is None or len(P.points) > 40:
            continue
        v = is_normal(P)
        b = is_normal_bruteforce(P, 4)
        assert v.is_normal == b.is_normal
        if not v.is_normal:
            assert v.witness == b.witness
            _check_witness(P, v)
        seen[v.is_normal] += 1
    assert seen[False] > 0 and seen[True] > 0


def test_polygons_normal():
    assert is_normal(gallery.dark_vertex_polygon()).is_normal


def test_known_non_normal():
    v = is_normal(gallery.order_gap_removal(0))
    assert not v.is_normal and v.witness == (2, (1, 2, 3))
    E = gallery.empty_simplex(3, 2)
    assert not is_normal(E).is_normal


@pytest.mark.parametrize("seed", range(4))
def test_dilations_normal(seed):
    rng = np.random.default_rng(seed)
    P = None
    while P is None:
        P = random_polytope(rng, 3, 4, 3)
    assert is_normal(P.dilate(2)).is_normal


def test_products_and_pyramids():
    E = gallery.empty_simplex(2, 1)  # empty with volume 2, so not normal
    sq = gallery.unit_cube(2)
    tri = convex_hull([(0, 0), (2, 0), (0, 3)])
    prod = convex_hull([a + b for a in lattice_points(sq) for b in lattice_points(tri)])
    assert is_normal(prod).is_normal
    base = random_normal_polytopes(5, 1, 3, box=2)[0]
    pyr = convex_hull([v + (0,) for v in base.vertices] + [(0, 0, 0, 1)])
    assert is_normal(pyr).is_normal
    assert not is_normal(E).is_normal


def test_placing_triangulation():
    cube = gallery.unit_cube(3)
    for i in range(len(cube.facets)):
        simplices = placing_triangulation(cube, i)
        assert len(simplices) == 2
        assert all(len(s) == 3 for s in simplices)
    P4 = gallery.maximal_polytope("P4")
    for i in range(len(P4.facets)):
        simplices = placing_triangulation(P4, i)
        assert all(set(s) <= set(P4.facet_vertices(i)) for s in simplices)
