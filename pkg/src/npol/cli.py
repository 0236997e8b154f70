"""Command-line interface: ``npol <verb> [options]``.

Exit status is 0 on success, 1 when the input is mathematically unsuitable
(not full-dimensional, not normal where normality is required, malformed
polytope file) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Sequence

from . import gallery
from .cone import is_normal
from .hull import DimensionError
from .jumps import accepted_jumps, candidate_bounds, certify_maximal
from .linalg import LatticeVector
from .polytope import (
    FormatError, LatticePolytope, convex_hull, format_json, format_text, height_over_polytope,
    parse_json, parse_text, stratum,
)
from .search import START_MODES, SearchConfig, run_search


class DomainError(Exception):
    pass


def parse_polytope_file(path: str, fmt: str | None = None) -> list[LatticeVector]:
    """Vertex list from a text (``dim``/``vertices`` header) or JSON file."""
    with open(path) as fh:
        text = fh.read()
    if fmt is None:
        fmt = "json" if path.endswith(".json") or text.lstrip().startswith("{") else "text"
    if fmt == "json":
        return parse_json(text)
    if fmt == "text":
        return parse_text(text)
    raise ValueError(f"unknown format {fmt!r}")


def gallery_polytope(name: str) -> LatticePolytope:
    """Resolve names like ``P4``, ``cross:2``, ``sharp:4,2``, ``empty:3,2``, ``ball:3,2``."""
    key, _, arg = name.partition(":")
    args = [int(a) for a in arg.split(",")] if arg else []
    try:
        if key in ("P4", "P5", "P4prime"):
            return gallery.maximal_polytope(key)
        if key == "cross":
            return gallery.cross_polytope(*args)
        if key == "sharp":
            return gallery.sharp_pair(*args)[0]
        if key == "empty":
            return gallery.empty_simplex(*args)
        if key == "dark":
            return gallery.dark_vertex_polygon()
        if key == "order-gap-P":
            return gallery.order_gap_example()[0]
        if key == "order-gap-Q":
            return gallery.order_gap_example()[1]
        if key == "simplex":
            return gallery.unit_simplex(*args)
        if key == "cube":
            return gallery.unit_cube(*args)
        if key == "ball":
            return gallery.ellipsoid_hull(gallery.ball(*args))
    except TypeError:
        raise ValueError(f"wrong number of parameters for gallery entry {key!r}") from None
    raise ValueError(f"unknown gallery entry {name!r}")


GALLERY_HELP = ("P4, P5, P4prime, cross:K, sharp:D,W, empty:P,Q, dark, order-gap-P, "
                "order-gap-Q, simplex:D, cube:D, ball:D,R")


def _fmt(v) -> str:
    return "(" + ",".join(str(int(x)) for x in v) + ")"


def _load(args, parser) -> LatticePolytope:
    if args.gallery and args.input:
        parser.error("give either --in or --gallery, not both")
    if args.gallery:
        try:
            return gallery_polytope(args.gallery)
        except ValueError as exc:
            parser.error(str(exc))
    if not args.input:
        parser.error("an input polytope is required (--in or --gallery)")
    # --format names the output format; input files are recognized by content
    return convex_hull(parse_polytope_file(args.input))


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_normal(P: LatticePolytope) -> None:
    v = is_normal(P)
    if not v.is_normal:
        k, x = v.witness
        raise DomainError(f"polytope is not normal: {_fmt(x)} in L({k}P) does not decompose")


def _polytope_text(P: LatticePolytope, fmt: str | None) -> str:
    return format_json(P.vertices) if fmt == "json" else format_text(P.vertices)


def cmd_hull(args, parser) -> int:
    P = _load(args, parser)
    _emit(args, _polytope_text(P, args.format))
    return 0


def cmd_points(args, parser) -> int:
    P = _load(args, parser)
    k = args.dilation
    pts = P.points if k == 1 else P.dilate(k).points
    _emit(args, "".join(" ".join(str(int(x)) for x in p) + "\n" for p in pts))
    print(f"{len(pts)} lattice points", file=sys.stderr)
    return 0


def cmd_normal(args, parser) -> int:
    P = _load(args, parser)
    v = is_normal(P)
    lines = [f"lattice points: {len(P.points)}"]
    if v.is_normal:
        lines.append("normal")
    else:
        k, x = v.witness
        lines.append(f"not normal: {_fmt(x)} in L({k}P) is not a sum of points of L(P) and L({k - 1}P)")
    _emit(args, "\n".join(lines) + "\n")
    return 0 if v.is_normal else 1


def cmd_strata(args, parser) -> int:
    P = _load(args, parser)
    lines = []
    for j in range(1, args.max_height + 1):
        s = stratum(P, j)
        lines.append(f"height {j}: {len(s.points)} points")
        if args.verbose:
            lines += ["  " + _fmt(z) for z in s.points]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_widths(args, parser) -> int:
    P = _load(args, parser)
    lines = ["alpha beta width multiplicity"]
    for f, w, m in zip(P.facets, P.widths, P.multiplicities):
        lines.append(f"{_fmt(f.alpha)} {f.beta} {w} {m}")
    lines.append(f"width {max(P.widths)}")
    lines.append(f"normalized volume {P.volume}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _bounds(P: LatticePolytope, args) -> list[int]:
    full = list(candidate_bounds(P))
    if args.exhaustive:
        return full
    cap = args.search_height_cap if args.search_height_cap is not None else 1 + max(P.widths)
    return [min(b, cap) for b in full]


def cmd_jumps(args, parser) -> int:
    P = _load(args, parser)
    _require_normal(P)
    jumps = accepted_jumps(P, _bounds(P, args), workers=args.workers)
    lines = [f"{_fmt(z)} height {height_over_polytope(P, z)}" for z in jumps]
    lines.append(f"{len(jumps)} jumps")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_certify(args, parser) -> int:
    P = _load(args, parser)
    _require_normal(P)
    say = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    cert = certify_maximal(P, mode=args.mode, workers=args.workers, checkpoint=args.checkpoint,
                           progress=say)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(cert.to_json())
    if args.log:
        with open(args.log, "w") as fh:
            fh.write(cert.to_log())
    print(f"candidates: {cert.candidate_count}")
    print(f"single-point extensions: {cert.point_filter_survivors}")
    print(f"accepted jumps: {len(cert.accepted)}")
    print(f"conclusion: {cert.conclusion}")
    for z in cert.accepted:
        print(f"jump: {_fmt(z)}")
    return 0


def cmd_search(args, parser) -> int:
    start = None
    if args.gallery or args.input:
        start = _load(args, parser)
        _require_normal(start)
    dim = start.dim if start is not None else args.dim
    try:
        config = SearchConfig(dim=dim, rng_seed=args.seed, max_lattice_points=args.max_points,
                              start_mode=args.start_mode, strategy=args.strategy,
                              worker_count=args.workers, output_dir=args.output_dir, runs=args.runs,
                              search_height_cap=args.search_height_cap, exhaustive=args.exhaustive)
    except ValueError as exc:
        parser.error(str(exc))
    report = run_search(config, start=start)
    _emit(args, report.summary())
    if args.log:
        with open(args.log, "w") as fh:
            for i, chain in enumerate(report.chains):
                fh.write(f"run {i}\n")
                fh.writelines(line + "\n" for line in chain)
    return 0


def cmd_gallery(args, parser) -> int:
    if not args.name:
        print(GALLERY_HELP)
        return 0
    try:
        P = gallery_polytope(args.name)
    except ValueError as exc:
        parser.error(str(exc))
    _emit(args, _polytope_text(P, args.format))
    return 0


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from None


def _rational_list(s: str) -> list[Fraction]:
    return [_rational(t) for t in s.split(",")]


def cmd_ellipsoid(args, parser) -> int:
    if args.semiaxes is None:
        parser.error("--semiaxes is required")
    if any(a <= 0 for a in args.semiaxes):
        parser.error("semiaxes must be positive")
    if args.center is not None and len(args.center) != len(args.semiaxes):
        parser.error("--center needs one coordinate per semiaxis")
    spec = gallery.EllipsoidSpec.axis_aligned(args.semiaxes, args.center)
    P = gallery.ellipsoid_hull(spec)
    v = is_normal(P)
    two = gallery.two_point_decomposition_check(spec, P)
    lines = [f"lattice points: {len(P.points)}", f"vertices: {len(P.vertices)}",
             "normal" if v.is_normal else f"not normal: witness {v.witness}",
             f"2-fold decomposition: {'ok' if two else 'fails'}"]
    if args.jumps:
        jumps = accepted_jumps(P, candidate_bounds(P), workers=args.workers)
        hs = [height_over_polytope(P, z) for z in jumps]
        lines.append(f"jumps: {len(jumps)}, max height {max(hs) if hs else 0}")
    _emit(args, "\n".join(lines) + "\n")
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(_polytope_text(P, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npol", description="Normal lattice polytopes and quantum jumps.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, polytope=True):
        if polytope:
            p.add_argument("--in", dest="input", help="polytope file (text or JSON)")
            p.add_argument("--gallery", help=f"named polytope: {GALLERY_HELP}")
        p.add_argument("--format", choices=["text", "json"], help="format of polytope output")
        p.add_argument("--out", help="write results here instead of standard output")
        p.add_argument("--workers", type=int, default=1)
        return p

    common(sub.add_parser("hull", help="vertices of the convex hull"))
    p = common(sub.add_parser("points", help="lattice points"))
    p.add_argument("--dilation", type=int, default=1)
    common(sub.add_parser("normal", help="normality test"))
    p = common(sub.add_parser("strata", help="lattice strata around the polytope"))
    p.add_argument("--max-height", type=int, default=3)
    p.add_argument("--verbose", action="store_true")
    common(sub.add_parser("widths", help="facet widths and multiplicities"))
    for name in ("jumps", "search"):
        p = common(sub.add_parser(name, help="quantum jumps" if name == "jumps" else "hunt for maximal polytopes"))
        p.add_argument("--search-height-cap", type=int)
        p.add_argument("--exhaustive", action="store_true", help="use the full candidate bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=["h1", "vol", "mult", "mixed"], default="mixed")
    p.add_argument("--max-points", type=int, default=100)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--start-mode", choices=START_MODES, default="unimodular-walk")
    p.add_argument("--output-dir")
    p.add_argument("--log", help="chain log file")
    p = common(sub.add_parser("certify-max", help="certify maximality"))
    p.add_argument("--log", help="text log of all verdicts")
    p.add_argument("--checkpoint", help="resume file")
    p.add_argument("--mode", choices=["certificate", "search"], default="certificate")
    p.add_argument("--verbose", action="store_true")
    p = common(sub.add_parser("gallery", help="export a named polytope"), polytope=False)
    p.add_argument("name", nargs="?")
    p = common(sub.add_parser("ellipsoid", help="hull of the lattice points of an ellipsoid"), polytope=False)
    p.add_argument("--semiaxes", type=_rational_list, help="comma separated, e.g. 1,2,5/2")
    p.add_argument("--center", type=_rational_list)
    p.add_argument("--jumps", action="store_true", help="also list jump heights")
    p.add_argument("--export", help="write the hull here")
    return parser


COMMANDS = {
    "hull": cmd_hull, "points": cmd_points, "normal": cmd_normal, "strata": cmd_strata,
    "widths": cmd_widths, "jumps": cmd_jumps, "certify-max": cmd_certify, "search": cmd_search,
    "gallery": cmd_gallery, "ellipsoid": cmd_ellipsoid,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.verb](args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DomainError, DimensionError, FormatError) as exc:
        print(f"npol: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"npol: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
