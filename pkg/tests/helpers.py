"""Seeded generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from npol.cone import is_normal
from npol.hull import DimensionError
from npol.jumps import candidate_array, single_point_mask
from npol.polytope import LatticePolytope, convex_hull


def random_polytope(rng: np.random.Generator, d: int, npts: int, box: int) -> LatticePolytope | None:
    pts = [tuple(int(x) for x in rng.integers(0, box + 1, size=d)) for _ in range(npts)]
    try:
        return convex_hull(pts)
    except DimensionError:
        return None


def random_normal_polytopes(seed: int, count: int, d: int, npts=(4, 8), box=3, max_points=60):
    """``count`` seeded normal polytopes with at most ``max_points`` lattice points."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        P = random_polytope(rng, d, int(rng.integers(npts[0], npts[1] + 1)), box)
        if P is None or len(P.points) > max_points:
            continue
        if is_normal(P).is_normal:
            out.append(P)
    return out


def single_point_candidates(P: LatticePolytope) -> list[tuple[int, ...]]:
    Z = candidate_array(P)
    keep = single_point_mask(P, Z)
    return [tuple(int(x) for x in z) for z in Z[keep]]
