"""One check per acceptance criterion; each records a PASS/FAIL line.

The lines are printed in the terminal summary.  Criterion 4 (the P5
census) takes hours and only runs with NPOL_SLOW=1.
"""

import os
import time
from collections import Counter
from fractions import Fraction
from math import gcd

import numpy as np
import pytest

from npol import gallery
from npol.cone import cone_facet_forms, is_normal, is_normal_bruteforce, lpar, lpar_height_census
from npol.hull import DimensionError
from npol.jumps import (
    EXTRA_POINT, accepted_jumps, candidate_array, candidate_bounds, certify_maximal, height1_jumps,
    is_jump, is_jump_dim3, is_jump_paracrit,
)
from npol.linalg import determinant
from npol.polytope import (
    contains, convex_hull, dilated_points, height_over_polytope, lattice_points, stratum,
    visible_facets,
)

from helpers import random_normal_polytopes, random_polytope, single_point_candidates


def _vec(x):
    return tuple(int(t) for t in x)


def _witness_ok(P, z, verdict) -> bool:
    """Re-validate a rejection from scratch on ``Q = conv(P, z)``."""
    Q = convex_hull(list(P.vertices) + [z])
    if verdict.reject_reason == EXTRA_POINT:
        w = verdict.witness
        return w != z and contains(Q, w) and not contains(P, w)
    k, x = verdict.degree, verdict.witness
    if k is None or not contains(Q, x, k):
        return False
    prev = {_vec(r) for r in dilated_points(Q, k - 1)}
    return all(tuple(a - b for a, b in zip(x, p)) not in prev for p in lattice_points(Q))


# -- 1 ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,count", [("P4", 41), ("P5", 42), ("P4prime", 22)])
def test_c01_fixture_tables(criterion, name, count):
    P = gallery.maximal_polytope(name)
    rec = gallery.maximal_polytope_record(name)
    got = Counter(zip(P.widths, P.multiplicities))
    want = Counter(tuple(x) for x in rec["width_multiplicity"])
    criterion(1, len(P.points) == count and got == want,
              f"{name}: {len(P.points)} lattice points (want {count}), width/mult multiset "
              f"{'matches' if got == want else 'differs'}")


# -- 2, 3, 4 -------------------------------------------------------------------------

def _census(criterion, n, name, want, checkpoint=None, workers=1):
    P = gallery.maximal_polytope(name)
    t = time.time()
    cert = certify_maximal(P, workers=workers, checkpoint=checkpoint)
    dt = time.time() - t
    witnesses = all(_witness_ok(P, z, v) for z, v in cert.verdicts if not v.accepted)
    got = (cert.candidate_count, cert.point_filter_survivors, len(cert.accepted))
    ok = cert.is_maximal and witnesses and (want is None or got == want)
    criterion(n, ok, f"{name}: candidates/survivors/accepted = {got}"
                     f"{'' if want is None else f' (want {want})'}, witnesses "
                     f"{'re-validated' if witnesses else 'FAILED'}, conclusion {cert.conclusion}, "
                     f"{dt:.0f}s with {workers} worker(s)")


def test_c02_p4_census(criterion):
    _census(criterion, 2, "P4", (196697, 84, 0))


def test_c03_p4prime_maximal(criterion):
    _census(criterion, 3, "P4prime", None)


@pytest.mark.slow
def test_c04_p5_census(criterion, tmp_path_factory):
    ckpt = os.environ.get("NPOL_P5_CHECKPOINT") or str(tmp_path_factory.mktemp("p5") / "p5.jsonl")
    _census(criterion, 4, "P5", (13525003, 980, 0), checkpoint=ckpt,
            workers=int(os.environ.get("NPOL_WORKERS", "1")))


# -- 5 ---------------------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_c05_cross_polytopes(criterion, k):
    P = gallery.cross_polytope(k)
    z = gallery.cross_polytope_jump_point(k)
    normal = is_normal(P).is_normal
    w = max(P.widths)
    empty = all(not stratum(P, j).points for j in range(1, k))
    v = is_jump(P, z)
    h = height_over_polytope(P, z)
    ok = normal and w == 2 * k * (k + 1) * (k * k + k + 1) and empty and v.accepted and h == k
    criterion(5, ok, f"k={k}: normal={normal}, width={w}, strata 1..{k - 1} empty={empty}, "
                     f"z={z} height {h} accepted={v.accepted}")


# -- 6 ---------------------------------------------------------------------------------

@pytest.mark.parametrize("d,w", [(3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (5, 1)])
def test_c06_sharp_bound(criterion, d, w):
    P, z = gallery.sharp_pair(d, w)
    v = is_jump(P, z)
    h = height_over_polytope(P, z)
    bounds = candidate_bounds(P)
    attained = any(-P.facets[i](z) == bounds[i] for i in visible_facets(P, z))
    ok = v.accepted and h == (d - 2) * w + 1 and attained
    criterion(6, ok, f"(d,w)=({d},{w}): jump height {h} (want {(d - 2) * w + 1}), "
                     f"accepted={v.accepted}, per-facet bound attained={attained}")


# -- 7 ---------------------------------------------------------------------------------

SUITE3 = dict(seed=7, count=200, d=3, box=3, max_points=30)
SUITE4 = dict(seed=11, count=50, d=4, npts=(5, 9), box=1, max_points=30)


def _suite(spec):
    spec = dict(spec)
    return random_normal_polytopes(spec.pop("seed"), spec.pop("count"), spec.pop("d"), **spec)


def test_c07_criteria_dim3(criterion):
    polys = _suite(SUITE3)
    n = disagree = 0
    for P in polys:
        for z in single_point_candidates(P):
            n += 1
            a = is_jump(P, z).accepted
            disagree += not (a == is_jump_dim3(P, z).accepted == is_jump_paracrit(P, z).accepted)
    criterion(7, disagree == 0 and len(polys) >= 200,
              f"d=3: {len(polys)} polytopes, {n} single-point candidates, {disagree} disagreements")


def _check4(polys, per_polytope):
    rng = np.random.default_rng(99)
    n = disagree = 0
    for P in polys:
        zs = single_point_candidates(P)
        if per_polytope is not None and len(zs) > per_polytope:
            zs = [zs[i] for i in sorted(rng.choice(len(zs), per_polytope, replace=False))]
        for z in zs:
            n += 1
            disagree += is_jump(P, z).accepted != is_jump_paracrit(P, z).accepted
    return n, disagree


def test_c07_criteria_dim4(criterion):
    polys = _suite(SUITE4)
    n, disagree = _check4(polys, 40)
    criterion(7, disagree == 0 and len(polys) >= 50,
              f"d=4: {len(polys)} polytopes, {n} sampled single-point candidates "
              f"(40 per polytope), {disagree} disagreements")


@pytest.mark.slow
def test_c07_criteria_dim4_all_candidates(criterion):
    polys = _suite(SUITE4)
    n, disagree = _check4(polys, None)
    criterion(7, disagree == 0, f"d=4: {len(polys)} polytopes, all {n} single-point candidates, "
                                f"{disagree} disagreements")


# -- 8 ---------------------------------------------------------------------------------

def test_c08_normality_oracle(criterion):
    rng = np.random.default_rng(8)
    n = disagree = nonnormal = 0
    per_dim = Counter()
    while n < 240:
        d = (2, 3, 3, 4)[n % 4]
        P = random_polytope(rng, d, int(rng.integers(d + 1, d + 5)), 3 if d < 4 else 2)
        if P is None or len(P.points) > 60:
            continue
        a = is_normal(P)
        b = is_normal_bruteforce(P, d + 1)
        disagree += a.is_normal != b.is_normal
        nonnormal += not a.is_normal
        per_dim[d] += 1
        n += 1
    criterion(8, disagree == 0, f"{n} polytopes {dict(sorted(per_dim.items()))}, "
                                f"{nonnormal} non-normal, {disagree} disagreements")


def test_c08_dilations(criterion):
    rng = np.random.default_rng(81)
    bad = n = 0
    while n < 20:
        d = 3 if n % 2 else 4
        P = random_polytope(rng, d, d + 1, 2)
        if P is None:
            continue
        for c in range(d - 1, d + 1):
            bad += not is_normal(P.dilate(c)).is_normal
        n += 1
    criterion(8, bad == 0, f"dilations cP, c in {{d-1, d}}, of {n} random polytopes: {bad} non-normal")


def test_c08_parallelotopes(criterion):
    rng = np.random.default_rng(82)
    bad = n = 0
    while n < 20:
        d = 3
        G = rng.integers(-2, 3, size=(d, d))
        if determinant(G.tolist()) == 0:
            continue
        corners = [tuple(int(x) for x in sum((G[i] for i in range(d) if m >> i & 1), np.zeros(d, int)))
                   for m in range(1 << d)]
        P = convex_hull(corners)
        if len(P.points) > 200:
            continue
        bad += not is_normal(P).is_normal
        n += 1
    criterion(8, bad == 0, f"{n} random lattice parallelotopes: {bad} non-normal")


# -- 9 ---------------------------------------------------------------------------------

def test_c09_lpar(criterion):
    rng = np.random.default_rng(9)
    n = count_bad = census_bad = 0
    while n < 500:
        d = int(rng.integers(2, 5))
        G = rng.integers(-6, 7, size=(d, d)).tolist()
        det = determinant(G)
        if det == 0 or abs(det) > 200:
            continue
        data = lpar(G)
        count_bad += len(data.lpar_points) != abs(det)
        for i, f in enumerate(cone_facet_forms(data)):
            h = sum(a * b for a, b in zip(f, G[i]))
            census = lpar_height_census(data, f)
            mu = abs(det) // h
            census_bad += census != {j: mu for j in range(h)}
        n += 1
    criterion(9, count_bad == 0 and census_bad == 0,
              f"{n} matrices: {count_bad} count mismatches, {census_bad} census mismatches")


def test_c09_empty_simplices(criterion):
    bad, n = [], 0
    for p in range(2, 8):
        for q in range(1, p):
            if gcd(p, q) != 1:
                continue
            degs = lpar([v + (1,) for v in gallery.empty_simplex(p, q).vertices]).degrees
            if any(t in (1, 3) for t in degs) or sorted(degs) != [0] + [2] * (p - 1):
                bad.append((p, q))
            n += 1
    criterion(9, not bad, f"{n} empty simplices with p <= 7: degrees 1 and 3 empty, failures {bad}")


# -- 10 --------------------------------------------------------------------------------

def test_c10_height_one(criterion):
    polys = _suite(SUITE3) + _suite(SUITE4)
    n = rejected = 0
    for P in polys:
        for z in height1_jumps(P):
            n += 1
            rejected += not is_jump(P, z).accepted
    criterion(10, rejected == 0, f"{len(polys)} polytopes, {n} height-1 points, {rejected} rejected")


def test_c10_polygons(criterion):
    rng = np.random.default_rng(10)
    n = higher = jumps = 0
    while n < 60:
        P = random_polytope(rng, 2, int(rng.integers(3, 7)), 5)
        if P is None:
            continue
        acc = accepted_jumps(P)
        jumps += len(acc)
        higher += sum(height_over_polytope(P, z) != 1 for z in acc)
        n += 1
    criterion(10, higher == 0, f"{n} polygons, {jumps} accepted jumps, {higher} of height > 1")


# -- 11, 12 ----------------------------------------------------------------------------

def test_c11_dark_vertex(criterion):
    P = gallery.dark_vertex_polygon()
    dark = gallery.is_dark_vertex(P, (0, 0))
    jumps = accepted_jumps(P)
    criterion(11, dark and bool(jumps), f"origin dark={dark}, polygon has {len(jumps)} jumps (not maximal)")


def test_c12_order_gap(criterion):
    P, Q = gallery.order_gap_example()
    parts = [len(P.points) == 8, is_normal(P).is_normal, is_normal(Q).is_normal]
    details = []
    for i in (0, 1):
        R = gallery.order_gap_removal(i)
        v = is_normal(R)
        ok = not v.is_normal
        if ok:
            k, x = v.witness
            prev = {_vec(r) for r in dilated_points(R, k - 1)}
            ok = contains(R, x, k) and all(tuple(a - b for a, b in zip(x, p)) not in prev
                                           for p in lattice_points(R))
        parts.append(ok)
        details.append(f"removal {i}: witness {v.witness}")
    criterion(12, all(parts), f"P has {len(P.points)} points, P and Q normal={parts[1] and parts[2]}, "
                              + ", ".join(details))


# -- 13 --------------------------------------------------------------------------------

def test_c13_balls(criterion):
    rows, ok = [], True
    for r in range(1, 9):
        spec = gallery.ball(3, r)
        P = gallery.ellipsoid_hull(spec)
        normal = is_normal(P).is_normal
        two = gallery.two_point_decomposition_check(spec, P)
        h1 = height1_jumps(P)
        accepted = bool(h1) and is_jump(P, h1[0]).accepted
        ok &= normal and two and accepted
        rows.append(f"r={r}:{len(P.points)}pts")
    B2 = gallery.ellipsoid_hull(gallery.ball(3, 2))
    top = max(height_over_polytope(B2, z) for z in accepted_jumps(B2))
    criterion(13, ok and top == 2, f"balls {' '.join(rows)} normal, 2-fold check and height-1 jumps ok={ok}; "
                                   f"B(0,2) max jump height {top}")


def test_c13_ellipsoids(criterion):
    rng = np.random.default_rng(13)
    n = bad = 0
    while n < 12:
        axes = [Fraction(int(rng.integers(2, 13)), int(rng.integers(1, 4))) for _ in range(3)]
        center = [Fraction(int(rng.integers(0, 4)), 4) for _ in range(3)]
        spec = gallery.EllipsoidSpec.axis_aligned(axes, center)
        try:
            P = gallery.ellipsoid_hull(spec)
        except DimensionError:
            continue
        bad += not (is_normal(P).is_normal and gallery.two_point_decomposition_check(spec, P))
        n += 1
    criterion(13, bad == 0, f"{n} random axis-aligned ellipsoids: {bad} failures")


# -- 14 --------------------------------------------------------------------------------

def _segment_extra(P, Z):
    """Mask: a lattice point outside P lies strictly inside some segment [z, p], p in L(P)."""
    A, c = np.array(P.system.A), np.array(P.system.c)
    out = np.zeros(len(Z), bool)
    for p in P.points:
        D = p - Z
        g = np.gcd.reduce(np.abs(D), axis=1)
        for k in range(1, int(g.max())):
            sel = (g > k) & ~out
            Y = Z[sel] + D[sel] * k // g[sel, None]
            out[np.flatnonzero(sel)[((Y @ A.T + c) < 0).any(axis=1)]] = True
    return out


def _strata_extra(P, Z, depth=2):
    """Mask: a lattice point of height <= depth over P lies in conv(P, z).

    y is in conv(P, z) iff z + t (y - z) lies in P for some t >= 1.  The
    quotients are of small integers, and division is correctly rounded, so
    the float comparisons below are exact.
    """
    A, c = np.array(P.system.A), np.array(P.system.c)
    HZ = Z @ A.T + c
    out = np.zeros(len(Z), bool)
    for j in range(1, depth + 1):
        for y in stratum(P, j).points:
            slope = (np.array(y) @ A.T + c)[None, :] - HZ
            with np.errstate(divide="ignore", invalid="ignore"):
                t = -HZ / slope
            lo = np.where(slope > 0, t, -np.inf).max(axis=1)
            hi = np.where(slope < 0, t, np.inf).min(axis=1)
            blocked = ((slope == 0) & (HZ < 0)).any(axis=1)
            out |= (Z != np.array(y)).any(axis=1) & ~blocked & (np.maximum(lo, 1) <= hi)
    return out


def test_c14_bound_completeness(criterion):
    polys = random_normal_polytopes(14, 50, 3, box=2, max_points=25)
    violations = scanned = single = 0
    for P in polys:
        C = candidate_array(P)
        lo, hi = C.min(axis=0), C.max(axis=0)
        mid, half = (lo + hi) // 2, (hi - lo + 1) // 2 + 1
        axes = [np.arange(m - 2 * h, m + 2 * h + 1) for m, h in zip(mid, half)]
        X = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        beyond = (P.heights(X) + np.array(candidate_bounds(P)) < 0).any(axis=1)
        Z = X[beyond]
        scanned += len(Z)
        # cheap exact rejections first, then a direct hull count
        Z = Z[~_segment_extra(P, Z)]
        Z = Z[~_strata_extra(P, Z)]
        n0 = len(P.points)
        for z in map(_vec, Z):
            if len(convex_hull(list(P.vertices) + [z]).points) != n0 + 1:
                continue
            single += 1
            violations += is_jump(P, z).accepted
    criterion(14, violations == 0, f"{len(polys)} polytopes, {scanned} box points beyond the bound, "
                                   f"{single} single-point extensions there, {violations} accepted")
