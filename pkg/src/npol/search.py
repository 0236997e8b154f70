"""Random hunts for maximal normal polytopes.

A run picks a normal start polytope and extends it by jumps until no jump
is left (the polytope is then certified maximal) or it grows beyond
``max_lattice_points`` (the run is abandoned and a new one starts).
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cone import is_normal
from .hull import DimensionError
from .jumps import (
    MaximalityCertificate, accepted_jumps, candidate_bounds, certify_maximal, height1_jumps,
)
from .linalg import LatticeVector, determinant
from .polytope import LatticePolytope, convex_hull, height_over_polytope, lattice_points, stratum

__all__ = [
    "SearchConfig", "SearchReport", "STRATEGIES", "START_MODES", "start_unimodular_walk",
    "start_shrunk_parallelotope", "random_simplex", "extend_step", "run_search",
]

STRATEGIES = {
    "height1-random": "h1", "param-volume": "vol", "param-avg-multiplicity": "mult", "mixed": "mixed",
}
_ALIASES = {v: k for k, v in STRATEGIES.items()}
START_MODES = ("unimodular-walk", "shrunk-parallelotope", "random-simplex")


def _strategy_name(s: str) -> str:
    s = _ALIASES.get(s, s)
    if s not in STRATEGIES:
        raise ValueError(f"unknown strategy {s!r}")
    return s


@dataclass
class SearchConfig:
    dim: int = 3
    rng_seed: int = 0
    max_lattice_points: int = 100
    start_mode: str = "unimodular-walk"
    strategy: str = "mixed"
    coordinate_range: tuple[int, int] = (-10, 30)
    worker_count: int = 1
    output_dir: str | None = None
    runs: int = 1
    walk_max_steps: int = 10
    parallelotope_range: tuple[int, int] = (-2, 2)
    search_height_cap: int | None = None  # None: 1 + width(P)
    exhaustive: bool = False  # full candidate bound during the search phase
    simplex_attempts: int = 1000

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if self.max_lattice_points < self.dim + 1:
            raise ValueError("max_lattice_points must be at least dim + 1")
        if self.start_mode not in START_MODES:
            raise ValueError(f"unknown start mode {self.start_mode!r}")
        self.strategy = _strategy_name(self.strategy)
        lo, hi = self.coordinate_range
        if lo > hi:
            raise ValueError("empty coordinate range")


@dataclass
class RunRecord:
    start: tuple[LatticeVector, ...]
    chain: list[str] = field(default_factory=list)
    outcome: str = ""  # "maximal" | "restart" | "no-start"
    final: tuple[LatticeVector, ...] = ()


@dataclass
class SearchReport:
    runs_attempted: int = 0
    maximal: list[tuple[LatticePolytope, MaximalityCertificate]] = field(default_factory=list)
    runs: list[RunRecord] = field(default_factory=list)
    jump_heights: Counter = field(default_factory=Counter)
    stratum_occupancy: Counter = field(default_factory=Counter)
    lowest_stratum_jumps: Counter = field(default_factory=Counter)

    @property
    def chains(self) -> list[list[str]]:
        return [r.chain for r in self.runs]

    def summary(self) -> str:
        lines = [f"runs: {self.runs_attempted}",
                 f"maximal polytopes: {len(self.maximal)}"]
        for i, r in enumerate(self.runs):
            lines.append(f"run {i}: {r.outcome} after {len(r.chain)} steps")
        for P, _ in self.maximal:
            lines.append("maximal: " + " ".join(_fmt(v) for v in P.vertices))
        if self.jump_heights:
            lines.append("jump heights: " + " ".join(f"{h}:{c}" for h, c in sorted(self.jump_heights.items())))
        if self.lowest_stratum_jumps:
            yes = self.lowest_stratum_jumps[True]
            no = self.lowest_stratum_jumps[False]
            lines.append(f"lowest nonempty stratum contains a jump: {yes} yes, {no} no")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return "(" + ",".join(str(int(x)) for x in v) + ")"


def _rng(config: SearchConfig, run: int = 0) -> np.random.Generator:
    return np.random.default_rng([config.rng_seed, run])


def _extend(P: LatticePolytope, z: Sequence[int]) -> LatticePolytope:
    return convex_hull(list(P.vertices) + [tuple(z)])


def start_unimodular_walk(config: SearchConfig, rng: np.random.Generator | None = None) -> LatticePolytope:
    """Unimodular simplex followed by a random number of random height-1 jumps."""
    rng = rng or _rng(config)
    d = config.dim
    P = convex_hull([(0,) * d] + [tuple(int(i == j) for j in range(d)) for i in range(d)])
    steps = int(rng.integers(0, config.walk_max_steps + 1)) if config.walk_max_steps else 0
    for _ in range(steps):
        h1 = height1_jumps(P)
        if not h1:
            break
        P = _extend(P, h1[int(rng.integers(len(h1)))])
    return P


def _random_parallelotope(config: SearchConfig, rng: np.random.Generator) -> LatticePolytope:
    d = config.dim
    lo, hi = config.parallelotope_range
    while True:
        G = rng.integers(lo, hi + 1, size=(d, d))
        if determinant(G.tolist()) != 0:
            break
    corners = []
    for m in range(1 << d):
        corners.append(tuple(int(sum(G[i][j] for i in range(d) if m >> i & 1)) for j in range(d)))
    return convex_hull(corners)


def start_shrunk_parallelotope(config: SearchConfig, rng: np.random.Generator | None = None,
                               start: LatticePolytope | None = None) -> LatticePolytope:
    """Shrink a lattice parallelotope vertex by vertex while it stays normal.

    At each step the admissible vertices are those whose removal (re-hull of
    the remaining lattice points) leaves a full-dimensional normal polytope;
    one of them is picked at random.
    """
    rng = rng or _rng(config)
    P = start if start is not None else _random_parallelotope(config, rng)
    while True:
        pts = lattice_points(P)
        options = []
        for v in P.vertices:
            try:
                Q = convex_hull([p for p in pts if p != v])
            except DimensionError:
                continue
            if is_normal(Q).is_normal:
                options.append(Q)
        if not options:
            return P
        P = options[int(rng.integers(len(options)))]


def random_simplex(config: SearchConfig, rng: np.random.Generator | None = None) -> LatticePolytope | None:
    """``d+1`` random points; the simplex if it is full-dimensional and normal."""
    rng = rng or _rng(config)
    lo, hi = config.coordinate_range
    pts = [tuple(int(x) for x in rng.integers(lo, hi + 1, size=config.dim)) for _ in range(config.dim + 1)]
    try:
        P = convex_hull(pts)
    except DimensionError:
        return None
    if len(P.vertices) != config.dim + 1:
        return None
    # bail out before the normality test if the simplex is too big to keep
    count = 0
    for block in P.scanner.blocks():
        count += len(block)
        if count > config.max_lattice_points:
            return None
    return P if is_normal(P).is_normal else None


def _avg_multiplicity(Q: LatticePolytope) -> Fraction:
    return Fraction(sum(Q.multiplicities), len(Q.multiplicities))


def _search_bounds(P: LatticePolytope, cap: int | None, exhaustive: bool) -> list[int]:
    full = candidate_bounds(P)
    if exhaustive:
        return list(full)
    cap = 1 + max(P.widths) if cap is None else cap
    return [min(b, cap) for b in full]


def extend_step(P: LatticePolytope, strategy: str, rng: np.random.Generator,
                height_cap: int | None = None, exhaustive: bool = False, workers: int = 1,
                stats: SearchReport | None = None) -> tuple[LatticeVector, LatticePolytope, str] | None:
    """One extension step; returns ``(z, conv(P, z), tag)`` or ``None``.

    ``height1-random`` only looks at height-1 points, so ``None`` from it
    means no height-1 jump exists.  The parametrized strategies score every
    jump within the search bounds and take the best, ties going to the
    lexicographically least point.
    """
    strategy = _strategy_name(strategy)
    if strategy in ("height1-random", "mixed"):
        h1 = height1_jumps(P)
        if h1:
            z = h1[int(rng.integers(len(h1)))]
            if stats is not None:
                stats.stratum_occupancy[1] += len(h1)
                stats.lowest_stratum_jumps[True] += 1
            return z, _extend(P, z), "h1"
        if strategy == "height1-random":
            return None
    jumps = accepted_jumps(P, _search_bounds(P, height_cap, exhaustive), workers=workers)
    if stats is not None:
        _record_strata(P, jumps, stats)
    if not jumps:
        return None
    if strategy == "param-avg-multiplicity":
        score, tag = (lambda z, Q: _avg_multiplicity(Q)), "mult"
    else:
        score, tag = (lambda z, Q: Q.volume - P.volume), "vol"
    best = None
    for z in jumps:  # lex order, so strict comparison keeps the least on ties
        Q = _extend(P, z)
        s = score(z, Q)
        if best is None or s > best[0]:
            best = (s, z, Q)
    return best[1], best[2], tag


def _record_strata(P: LatticePolytope, jumps: list[LatticeVector], stats: SearchReport) -> None:
    if not jumps:
        return
    heights = [height_over_polytope(P, z) for z in jumps]
    for h in heights:
        stats.stratum_occupancy[h] += 1
    lowest = 1
    while not stratum(P, lowest).points:
        lowest += 1
    stats.lowest_stratum_jumps[min(heights) == lowest] += 1


def _start(config: SearchConfig, rng: np.random.Generator) -> LatticePolytope | None:
    if config.start_mode == "unimodular-walk":
        return start_unimodular_walk(config, rng)
    if config.start_mode == "shrunk-parallelotope":
        return start_shrunk_parallelotope(config, rng)
    for _ in range(config.simplex_attempts):
        P = random_simplex(config, rng)
        if P is not None:
            return P
    return None


def run_search(config: SearchConfig, start: LatticePolytope | None = None) -> SearchReport:
    """Run ``config.runs`` independent hunts; deterministic for a fixed seed."""
    report = SearchReport()
    for run in range(config.runs):
        rng = _rng(config, run)
        report.runs_attempted += 1
        P = start if start is not None else _start(config, rng)
        if P is None:
            report.runs.append(RunRecord((), outcome="no-start"))
            continue
        rec = RunRecord(P.vertices)
        report.runs.append(rec)
        n = 0
        while True:
            if len(P.points) > config.max_lattice_points:
                rec.outcome = "restart"
                break
            step = extend_step(P, config.strategy, rng, config.search_height_cap,
                               config.exhaustive, config.worker_count, report)
            if step is None:
                cert = certify_maximal(P, workers=config.worker_count)
                if cert.is_maximal:
                    rec.outcome = "maximal"
                    report.maximal.append((P, cert))
                    break
                # a jump beyond the search-phase bound
                z = cert.accepted[0]
                step = (z, _extend(P, z), "cert")
            z, Q, tag = step
            n += 1
            h = height_over_polytope(P, z)
            report.jump_heights[h] += 1
            rec.chain.append(f"step {n}: z={_fmt(z)} ht={h} strategy={tag}")
            P = Q
        rec.final = P.vertices
        if config.output_dir:
            _write_run(config.output_dir, run, rec, report)
    return report


def _write_run(outdir: str, run: int, rec: RunRecord, report: SearchReport) -> None:
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, f"run{run:04d}.log"), "w") as fh:
        fh.write("start: " + " ".join(_fmt(v) for v in rec.start) + "\n")
        for line in rec.chain:
            fh.write(line + "\n")
        fh.write(f"outcome: {rec.outcome}\n")
    if rec.outcome == "maximal":
        _, cert = report.maximal[-1]
        with open(os.path.join(outdir, f"run{run:04d}_certificate.json"), "w") as fh:
            fh.write(cert.to_json())
