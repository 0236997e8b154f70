"""Quantum jumps: candidates, jump criteria, jump measures, maximality.

A point ``z`` outside a normal polytope ``P`` is a jump if ``Q = conv(P, z)``
has exactly one new lattice point (``z`` itself) and ``Q`` is again normal.
Candidates for jumps satisfy ``ht_F(z) >= -(1 + (d-2) width_F(P))`` for
every facet ``F``; :func:`certify_maximal` runs all of them through a
cheap point filter and the exact normality criterion.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .cone import lpar
from .enumeration import evaluate, region_scanner, to_array
from .linalg import LatticeVector
from .parallel import ordered_map, shared
from .polytope import (
    LatticePolytope, contains, convex_hull, dilated_points, facet_triangulation,
    stratum, visible_facets,
)

__all__ = [
    "EXTRA_POINT", "NON_NORMAL", "JumpCandidate", "JumpVerdict", "MaximalityCertificate",
    "candidate_bounds", "candidate_blocks", "enumerate_candidates", "count_candidates",
    "single_point_mask", "extra_lattice_point", "is_single_point_extension",
    "is_jump", "is_jump_dim3", "is_jump_paracrit", "height1_jumps",
    "jump_volume", "jump_base", "accepted_jumps", "certify_maximal", "is_decomposable",
]

EXTRA_POINT = "extra-lattice-point"
NON_NORMAL = "non-normal"


class JumpCandidate(NamedTuple):
    z: LatticeVector
    per_visible_facet_heights: dict[int, int]
    height: int


class JumpVerdict(NamedTuple):
    """Outcome of a jump test.

    ``witness`` is a second new lattice point of ``conv(P, z)`` for
    ``EXTRA_POINT`` rejections, and a point of ``L(degree * Q)`` that is not
    a sum of a point of ``L(Q)`` and one of ``L((degree-1) Q)`` for
    ``NON_NORMAL`` rejections.
    """

    accepted: bool
    reject_reason: str | None = None
    witness: LatticeVector | None = None
    degree: int | None = None

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "reason": self.reject_reason,
                "witness": list(self.witness) if self.witness is not None else None,
                "degree": self.degree}


ACCEPTED = JumpVerdict(True)


def _vec(x) -> LatticeVector:
    return tuple(int(v) for v in x)


def _require_outside(P: LatticePolytope, z) -> LatticeVector:
    z = _vec(z)
    if len(z) != P.dim:
        raise ValueError(f"point has {len(z)} coordinates, polytope lives in dimension {P.dim}")
    if contains(P, z):
        raise ValueError(f"{z} lies in the polytope")
    return z


# -- candidates -------------------------------------------------------------

def candidate_bounds(P: LatticePolytope) -> tuple[int, ...]:
    """Per-facet depth bounds ``1 + (d-2) width_F(P)``."""
    if P.dim < 2:
        raise ValueError("jump candidates need dimension >= 2")
    return tuple(1 + (P.dim - 2) * w for w in P.widths)


def _region_scanner(P: LatticePolytope, bounds: Sequence[int]):
    A = P.system.A
    c = [b + r for b, r in zip(P.system.c, bounds)]
    return region_scanner(A, c)


def candidate_blocks(P: LatticePolytope, bounds: Sequence[int] | None = None,
                     max_rows: int = 1 << 20) -> Iterator[np.ndarray]:
    """Candidate points outside ``P`` as integer arrays, in lexicographic order."""
    if bounds is None:
        bounds = candidate_bounds(P)
    for X in _region_scanner(P, bounds).blocks(max_rows):
        H = P.heights(X)
        out = X[H.min(axis=1) < 0]
        if len(out):
            yield out


def _compact(X: np.ndarray) -> np.ndarray:
    # int32 storage halves the memory of large pools; arithmetic upcasts
    if X.dtype == np.int64 and len(X) and np.abs(X).max() < 1 << 30:
        return X.astype(np.int32)
    return X


def candidate_array(P: LatticePolytope, bounds: Sequence[int] | None = None) -> np.ndarray:
    parts = [_compact(X) for X in candidate_blocks(P, bounds)]
    if not parts:
        return np.zeros((0, P.dim), dtype=np.int64)
    return np.concatenate(parts)


def enumerate_candidates(P: LatticePolytope, bounds: Sequence[int] | None = None) -> Iterator[JumpCandidate]:
    for X in candidate_blocks(P, bounds):
        H = P.heights(X)
        for row, h in zip(X, H):
            vis = {int(i): int(-h[i]) for i in np.nonzero(h < 0)[0]}
            yield JumpCandidate(_vec(row), vis, max(vis.values()))


def count_candidates(P: LatticePolytope, bounds: Sequence[int] | None = None) -> int:
    return sum(len(X) for X in candidate_blocks(P, bounds))


# -- point filter -------------------------------------------------------------

class _Pool:
    """Lattice points outside ``P`` that may become extra points.

    For ``z`` in the region ``ht_F >= -bounds[F]`` every lattice point of
    ``conv(P, z)`` lies in the same region, so one pool serves all of them.
    """

    def __init__(self, P: LatticePolytope, points: np.ndarray):
        self.P = P
        self.points = points
        H = _compact(P.heights(points))
        self.H = H
        self.order = []
        self.keys = []
        for f in range(H.shape[1]):
            o = np.argsort(H[:, f], kind="stable")
            if len(o) < 1 << 31:
                o = o.astype(np.int32)
            self.order.append(o)
            self.keys.append(H[o, f])

    @classmethod
    def for_bounds(cls, P: LatticePolytope, bounds: Sequence[int]) -> "_Pool":
        return cls(P, candidate_array(P, bounds))

    def _hits(self, f: int, m: int, hz: np.ndarray, top: int, bottom: int) -> np.ndarray:
        lo = np.searchsorted(self.keys[f], top, side="left")
        hi = np.searchsorted(self.keys[f], bottom, side="right")
        if lo >= hi:
            return self.order[f][:0]
        rows = self.order[f][lo:hi]
        Hy = self.H[rows]
        if Hy.dtype == np.int32:
            Hy = Hy.astype(np.int64)
        ok = (m * Hy + Hy[:, f:f + 1] * hz[None, :] >= 0).all(axis=1)
        return rows[ok]

    def extra_point(self, hz: np.ndarray, least: bool = True) -> int | None:
        """Index of an extra lattice point of ``conv(P, z)``, or ``None``.

        ``y`` lies in the pyramid over a visible facet ``F`` with apex ``z``
        (``m = -ht_F(z)``) iff ``-m <= ht_F(y) <= 0`` and
        ``m ht_G(y) + ht_F(y) ht_G(z) >= 0`` for every facet ``G``.  With
        ``least`` the lex-least such point is returned; otherwise the layers
        right below each facet are tried first and any hit is returned.
        """
        visible = [int(f) for f in np.nonzero(hz < 0)[0] if hz[f] <= -2]
        if not least:
            for f in visible:
                m = -int(hz[f])
                for s in range(1, m):
                    rows = self._hits(f, m, hz, -s, -s)
                    if len(rows):
                        return int(rows[0])
            return None
        best = None
        for f in visible:
            m = -int(hz[f])
            rows = self._hits(f, m, hz, -m + 1, -1)
            if len(rows):
                i = int(rows.min())
                if best is None or i < best:
                    best = i
        return best


def _segment_sieve(P: LatticePolytope, Z: np.ndarray, HZ: np.ndarray) -> np.ndarray:
    """False where a lattice point strictly inside some ``[z, p]`` misses ``P``.

    ``p`` runs over ``L(P)``; the first lattice point after ``z`` on the
    segment is ``z + (p - z) / g`` with ``g`` the gcd of ``p - z``.
    """
    LP = P.points
    HP = P.heights(LP)
    keep = np.ones(len(Z), dtype=bool)
    if len(Z) == 0:
        return keep
    if Z.dtype == object or LP.dtype == object or HZ.dtype == object:
        for i, z in enumerate(Z):
            for p, hp in zip(LP, HP):
                D = [int(a) - int(b) for a, b in zip(p, z)]
                g = np.gcd.reduce(np.array([abs(x) for x in D], dtype=object))
                if g > 1 and min(int(a) + (int(b) - int(a)) // g for a, b in zip(HZ[i], hp)) < 0:
                    keep[i] = False
                    break
        return keep
    n, m = HP.shape
    step = max(1, (1 << 22) // max(1, n * m))
    for s in range(0, len(Z), step):
        z = Z[s:s + step]
        hz = HZ[s:s + step]
        D = np.abs(LP[None, :, :] - z[:, None, :])
        g = np.gcd.reduce(D, axis=2)
        hy = hz[:, None, :] + (HP[None, :, :] - hz[:, None, :]) // g[:, :, None]
        bad = (g > 1) & (hy.min(axis=2) < 0)
        keep[s:s + step] = ~bad.any(axis=1)
    return keep


def _filter_chunk(args) -> list[int]:
    start, stop = args
    pool: _Pool = shared("pool")
    Z = pool.points[start:stop]
    HZ = pool.H[start:stop]
    keep = _segment_sieve(pool.P, Z, HZ)
    return [start + int(i) for i in np.nonzero(keep)[0]
            if pool.extra_point(HZ[i], least=False) is None]


def single_point_mask(P: LatticePolytope, Z, workers: int = 1) -> np.ndarray:
    """Boolean mask: which rows of ``Z`` (all outside ``P``) give single-point extensions."""
    Z = to_array(Z)
    if len(Z) == 0:
        return np.zeros(0, dtype=bool)
    HZ = P.heights(Z)
    if (HZ.min(axis=1) >= 0).any():
        raise ValueError("all points must lie outside the polytope")
    bounds = np.maximum(-HZ.min(axis=0), 0)
    pool = _Pool.for_bounds(P, [int(b) for b in bounds])
    idx = _pool_index(pool, Z)
    mask = np.zeros(len(pool.points), dtype=bool)
    for kept in ordered_map(_filter_chunk, _chunks(len(pool.points)), workers, {"pool": pool}):
        mask[kept] = True
    return mask[idx]


def _pool_index(pool: _Pool, Z: np.ndarray) -> np.ndarray:
    # pool rows are lex sorted and contain every row of Z
    lo = np.minimum(pool.points.min(axis=0), Z.min(axis=0))
    hi = np.maximum(pool.points.max(axis=0), Z.max(axis=0))
    keys_pool = _lex_key(pool.points, lo, hi)
    keys_z = _lex_key(Z, lo, hi)
    return np.searchsorted(keys_pool, keys_z)


def _lex_key(X: np.ndarray, lo, hi):
    span = [int(h - l) + 1 for l, h in zip(lo, hi)]
    total = 1
    for s in span:
        total *= s
    if total < 1 << 62 and X.dtype != object:
        key = np.zeros(len(X), dtype=np.int64)
        for i, s in enumerate(span):
            key = key * s + (X[:, i] - lo[i])
        return key
    return np.array([tuple(int(v) for v in row) for row in X], dtype=object)


def _chunks(n: int, size: int = 4096) -> list[tuple[int, int]]:
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def extra_lattice_point(P: LatticePolytope, z) -> LatticeVector | None:
    """Lexicographically least lattice point of ``conv(P, z)`` outside ``L(P) + {z}``."""
    z = _require_outside(P, z)
    hz = np.array([f(z) for f in P.facets], dtype=object)
    bounds = [max(0, -int(h)) for h in hz]
    pool = _Pool.for_bounds(P, bounds)
    if pool.H.dtype != object:
        hz = hz.astype(np.int64)
    i = pool.extra_point(hz)
    return None if i is None else _vec(pool.points[i])


def is_single_point_extension(P: LatticePolytope, z) -> bool:
    return extra_lattice_point(P, z) is None


# -- normality of conv(P, z) ---------------------------------------------------

def is_decomposable(Q: LatticePolytope, k: int, X: np.ndarray) -> np.ndarray:
    """Mask: which points of ``L(kQ)`` split as ``L(Q) + L((k-1)Q)``."""
    X = to_array(X)
    out = np.zeros(len(X), dtype=bool)
    LQ = Q.points
    A, c = Q.system.A, [(k - 1) * x for x in Q.system.c]
    for i, x in enumerate(X):
        H = evaluate(A, c, x[None, :] - LQ)
        out[i] = bool((H.min(axis=1) >= 0).any())
    return out


def _normality_defect(P: LatticePolytope, Q: LatticePolytope, z: LatticeVector):
    """Check ``L(kQ) = L((k-1)Q) u L(kP)`` in coordinates with ``z`` at 0.

    Returns ``None`` when the condition holds for ``k = 2..d-1``; otherwise
    ``(k, x)`` with ``x`` the lex-least non-decomposable point of ``kQ``
    (every such point lies in one of the defect sets).
    """
    neg = tuple(-v for v in z)
    Qt, Pt = Q.translate(neg), P.translate(neg)
    failed = False
    for k in range(2, P.dim):
        X = dilated_points(Qt, k)
        if len(X) == 0:
            continue
        in_prev = evaluate(Qt.system.A, [(k - 1) * x for x in Qt.system.c], X).min(axis=1) >= 0
        in_kp = evaluate(Pt.system.A, [k * x for x in Pt.system.c], X).min(axis=1) >= 0
        defect = X[~(in_prev | in_kp)]
        if len(defect) == 0:
            continue
        failed = True
        orig = defect + np.array([k * v for v in z], dtype=defect.dtype)
        dec = is_decomposable(Q, k, orig)
        if not dec.all():
            return k, _vec(orig[int(np.argmin(dec))])
    if failed:
        raise AssertionError("defect without a non-decomposable point; is P normal?")
    return None


def is_jump(P: LatticePolytope, z) -> JumpVerdict:
    """Decide whether ``conv(P, z)`` is a quantum jump over the normal ``P``."""
    z = _require_outside(P, z)
    w = extra_lattice_point(P, z)
    if w is not None:
        return JumpVerdict(False, EXTRA_POINT, w)
    return _normal_part(P, z)


def _normal_part(P: LatticePolytope, z: LatticeVector) -> JumpVerdict:
    Q = convex_hull(list(P.vertices) + [z])
    defect = _normality_defect(P, Q, z)
    if defect is None:
        return ACCEPTED
    k, x = defect
    return JumpVerdict(False, NON_NORMAL, x, k)


def is_jump_dim3(P: LatticePolytope, z) -> JumpVerdict:
    """Jump test in dimension 3 by counting points under each visible facet.

    For a visible facet ``F`` with ``m = -ht_F(z)``, ``P_{z,F}`` is the set
    of points ``x`` of ``P`` whose segment to ``z`` meets ``F``.  The test
    demands at least ``mu(F)`` lattice points of ``P_{z,F}`` on every height
    ``1..m-1`` over ``F``.  Witnesses of rejections come from the general
    criterion.
    """
    if P.dim != 3:
        raise ValueError("is_jump_dim3 needs a 3-dimensional polytope")
    z = _require_outside(P, z)
    w = extra_lattice_point(P, z)
    if w is not None:
        return JumpVerdict(False, EXTRA_POINT, w)
    LP = P.points
    H = P.heights(LP)
    hz = np.array([f(z) for f in P.facets], dtype=H.dtype)
    for f in visible_facets(P, z):
        m = -int(hz[f])
        # segment [x, z] meets F iff m ht_G(x) + ht_F(x) ht_G(z) >= 0 for all G
        inside = (m * H + H[:, f:f + 1] * hz[None, :] >= 0).all(axis=1)
        hf = H[inside, f]
        mu = P.multiplicities[f]
        for j in range(1, m):
            if int((hf == j).sum()) < mu:
                v = _normal_part(P, z)
                return v if not v.accepted else JumpVerdict(False, NON_NORMAL)
    return ACCEPTED


def is_jump_paracrit(P: LatticePolytope, z) -> JumpVerdict:
    """Jump test through parallelotope points of the pyramids over facets.

    Every visible facet is triangulated; for each simplex ``D`` the cone
    spanned by ``D`` and ``z`` (homogenized) must have all of its
    parallelotope points ``y`` below ``F`` satisfying ``y - (z, 1) in C(P)``.
    A failing ``y`` of degree ``k`` is a non-decomposable point of ``kQ``.
    """
    z = _require_outside(P, z)
    w = extra_lattice_point(P, z)
    if w is not None:
        return JumpVerdict(False, EXTRA_POINT, w)
    zh = z + (1,)
    worst = None
    for fi in visible_facets(P, z):
        f = P.facets[fi]
        for simplex in facet_triangulation(P, fi):
            gens = [v + (1,) for v in simplex] + [zh]
            for y in lpar(gens).lpar_points:
                if sum(a * b for a, b in zip(f.alpha, y)) + f.beta * y[-1] >= 0:
                    continue
                diff = [a - b for a, b in zip(y, zh)]
                if all(sum(a * b for a, b in zip(g.alpha, diff)) + g.beta * diff[-1] >= 0
                       for g in P.facets):
                    continue
                key = (y[-1], y[:-1])
                if worst is None or key < worst:
                    worst = key
    if worst is None:
        return ACCEPTED
    return JumpVerdict(False, NON_NORMAL, worst[1], worst[0])


def height1_jumps(P: LatticePolytope, verify: bool = False) -> list[LatticeVector]:
    """Lattice points of height 1 over ``P``; each is a jump when ``P`` is normal."""
    pts = stratum(P, 1).points
    if verify:
        for z in pts:
            v = is_jump(P, z)
            if not v.accepted:
                raise AssertionError(f"height-1 point {z} rejected: {v}")
    return pts


def jump_volume(P: LatticePolytope, z) -> int:
    """Normalized volume added by ``z``: ``vol(conv(P, z)) - vol(P)``."""
    z = _require_outside(P, z)
    return convex_hull(list(P.vertices) + [z]).volume - P.volume


def jump_base(P: LatticePolytope, z) -> int:
    """Total multiplicity of the facets visible from ``z``."""
    z = _require_outside(P, z)
    return sum(P.multiplicities[i] for i in visible_facets(P, z))


def accepted_jumps(P: LatticePolytope, bounds: Sequence[int] | None = None,
                   height_cap: int | None = None, workers: int = 1) -> list[LatticeVector]:
    """All jumps over ``P`` inside the candidate region, in lex order."""
    if bounds is None:
        bounds = candidate_bounds(P)
    if height_cap is not None:
        bounds = [min(b, height_cap) for b in bounds]
    pool = _Pool.for_bounds(P, bounds)
    out = []
    for kept in ordered_map(_filter_chunk, _chunks(len(pool.points)), workers, {"pool": pool}):
        for i in kept:
            z = _vec(pool.points[i])
            if _normal_part(P, z).accepted:
                out.append(z)
    return out


# -- certification ----------------------------------------------------------------

@dataclass
class MaximalityCertificate:
    polytope: LatticePolytope
    facet_bounds: tuple[int, ...]
    candidate_count: int
    point_filter_survivors: int
    verdicts: list[tuple[LatticeVector, JumpVerdict]] = field(default_factory=list)
    mode: str = "certificate"

    @property
    def accepted(self) -> list[LatticeVector]:
        return [z for z, v in self.verdicts if v.accepted]

    @property
    def conclusion(self) -> str:
        return "not-maximal" if self.accepted else "maximal"

    @property
    def is_maximal(self) -> bool:
        return not self.accepted

    def to_dict(self) -> dict:
        return {
            "polytope": {"dim": self.polytope.dim,
                         "vertices": [list(v) for v in self.polytope.vertices]},
            "facet_bounds": list(self.facet_bounds),
            "candidate_count": self.candidate_count,
            "point_filter_survivors": self.point_filter_survivors,
            "verdicts": [{"z": list(z), **v.to_dict()} for z, v in self.verdicts],
            "conclusion": self.conclusion,
            "accepted": [list(z) for z in self.accepted],
            "mode": self.mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_log(self) -> str:
        lines = [
            "vertices: " + " ".join(_fmt(v) for v in self.polytope.vertices),
            "facet bounds: " + " ".join(str(b) for b in self.facet_bounds),
            f"candidates: {self.candidate_count}",
            f"single-point extensions: {self.point_filter_survivors}",
        ]
        for z, v in self.verdicts:
            if v.accepted:
                lines.append(f"{_fmt(z)} accepted")
            else:
                deg = f" degree {v.degree}" if v.degree is not None else ""
                wit = _fmt(v.witness) if v.witness is not None else "-"
                lines.append(f"{_fmt(z)} rejected {v.reject_reason}{deg} witness {wit}")
        lines.append(f"conclusion: {self.conclusion}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return "(" + ",".join(str(int(x)) for x in v) + ")"


class _Checkpoint:
    """Append-only JSON-lines record of finished work units."""

    def __init__(self, path: str | None, header: dict):
        self.path = path
        self.done: dict[str, object] = {}
        if path is None:
            return
        if os.path.exists(path):
            with open(path) as fh:
                lines = [json.loads(line) for line in fh if line.strip()]
            if lines and lines[0] != {"header": header}:
                raise ValueError(f"checkpoint {path} belongs to a different run")
            for rec in lines[1:]:
                self.done[rec["key"]] = rec["value"]
        else:
            with open(path, "w") as fh:
                fh.write(json.dumps({"header": header}) + "\n")

    def get(self, key: str):
        return self.done.get(key)

    def put(self, key: str, value) -> None:
        self.done[key] = value
        if self.path is None:
            return
        with open(self.path, "a") as fh:
            fh.write(json.dumps({"key": key, "value": value}) + "\n")
            fh.flush()
            os.fsync(fh.fileno())


def _verdict_for(i: int) -> tuple[int, JumpVerdict]:
    pool: _Pool = shared("pool")
    z = _vec(pool.points[i])
    return i, _normal_part(pool.P, z)


def certify_maximal(P: LatticePolytope, *, mode: str = "certificate", workers: int = 1,
                    bounds: Sequence[int] | None = None, checkpoint: str | None = None,
                    chunk_size: int = 4096, progress=None) -> MaximalityCertificate:
    """Run every candidate through the point filter and the jump criterion.

    ``mode="certificate"`` is exhaustive; ``mode="search"`` stops at the
    first accepted jump (lex order).  ``checkpoint`` names a JSON-lines file
    that lets an interrupted run resume.  The result does not depend on
    ``workers``.
    """
    if mode not in ("certificate", "search"):
        raise ValueError(f"unknown mode {mode!r}")
    bounds = tuple(candidate_bounds(P) if bounds is None else bounds)
    say = progress or (lambda msg: None)
    pool = _Pool.for_bounds(P, bounds)
    n = len(pool.points)
    say(f"candidates: {n}")
    header = {"vertices": [list(v) for v in P.vertices], "bounds": list(bounds), "chunk": chunk_size}
    ckpt = _Checkpoint(checkpoint, header)

    chunks = _chunks(n, chunk_size)
    todo = [c for c in chunks if ckpt.get(f"filter:{c[0]}") is None]
    state = {"pool": pool}
    for c, kept in zip(todo, ordered_map(_filter_chunk, todo, workers, state)):
        ckpt.put(f"filter:{c[0]}", kept)
        say(f"filtered {c[1]}/{n}")
    survivors = sorted(i for c in chunks for i in ckpt.get(f"filter:{c[0]}"))
    say(f"single-point extensions: {len(survivors)}")

    verdicts: list[tuple[LatticeVector, JumpVerdict]] = []
    todo = [i for i in survivors if ckpt.get(f"verdict:{i}") is None]
    results = {}
    for i in survivors:
        rec = ckpt.get(f"verdict:{i}")
        if rec is not None:
            results[i] = JumpVerdict(rec["accepted"], rec["reason"],
                                     None if rec["witness"] is None else tuple(rec["witness"]),
                                     rec["degree"])
    if mode == "search":
        # sequential in lex order so the first accepted jump is well defined
        for i in survivors:
            if i not in results:
                results[i] = _normal_part(P, _vec(pool.points[i]))
                ckpt.put(f"verdict:{i}", results[i].to_dict())
            verdicts.append((_vec(pool.points[i]), results[i]))
            if results[i].accepted:
                break
    else:
        for i, v in ordered_map(_verdict_for, todo, workers, state):
            results[i] = v
            ckpt.put(f"verdict:{i}", v.to_dict())
        verdicts = [(_vec(pool.points[i]), results[i]) for i in survivors]
    return MaximalityCertificate(P, bounds, n, len(survivors), verdicts, mode)
