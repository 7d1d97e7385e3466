"""Command-line front end: ``cubiclam {gap,slice,ray,threads,sn}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure
(partial output is still written and flagged).
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path
from typing import Sequence

from .angles import Angle, Arc
from .cubic import CubicMap, root_of_unity
from .export import draw_polyline, gap_json, gap_svg, pqpg_json, pqpg_svg, ppm_bytes
from .gaps import grow_gap, major_from_critical_tag, major_from_hole, pqpg_holes
from .rays import RayError, trace_dynamic_ray, trace_parameter_ray
from .render import WORKERS_ENV, Window, default_workers, render_slice
from .threads import (
    bad_index_schedule,
    enumerate_periodic_patterns,
    patterns_to_json,
    simulate_contraction,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULT_WINDOW = "-3,-3,3,3"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_lambda(text: str) -> complex:
    """``p/qturn`` or ``p/q`` for exp(2 pi i p/q); anything else as a complex literal."""
    s = text.strip().replace(" ", "")
    m = re.fullmatch(r"(-?\d+)/(\d+)(turn)?", s)
    if m:
        q = int(m.group(2))
        if q == 0:
            raise ValueError(f"bad lambda {text!r}: zero denominator")
        return root_of_unity(int(m.group(1)), q)
    try:
        return parse_complex(s)
    except ValueError:
        raise ValueError(f"bad lambda {text!r}; use p/qturn or a complex number like 0.5+0.2j") from None


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"bad complex number {text!r}") from None


def parse_angle(text: str) -> Angle:
    return Angle.parse(text)


def parse_resolution(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text.strip())
    if not m or int(m.group(1)) < 1 or int(m.group(2)) < 1:
        raise ValueError(f"resolution must look like 800x800, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_hole(text: str) -> Arc:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"hole must be two angles t1,t2, got {text!r}")
    return Arc(Angle.parse(parts[0]), Angle.parse(parts[1]))


def read_config(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment; keys use the long option names."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e.strerror}") from None
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubiclam", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file overriding defaults")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gap", help="parameter-gap holes or one grown invariant gap (SVG + JSON)")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--pqpg", action="store_true", help="all holes up to --max-period")
    src.add_argument("--hole", help="periodic gap from a major hole t1,t2")
    src.add_argument("--tag", help="critical gap from a tag p/q")
    g.add_argument("--max-period", type=_positive_int, default=3)
    g.add_argument("--depth", type=int, default=5)
    g.add_argument("--out", default="gap.svg", help="SVG path; the JSON goes next to it")

    s = sub.add_parser("slice", help="render a lambda-slice in the b-plane as PPM")
    s.add_argument("--lambda", dest="lam", default="1/3turn")
    s.add_argument("--res", default="800x800")
    s.add_argument("--window", default=DEFAULT_WINDOW, help="xmin,ymin,xmax,ymax")
    s.add_argument("--max-iter", type=_positive_int, default=200)
    s.add_argument("--workers", type=_positive_int, default=None,
                   help=f"defaults to ${WORKERS_ENV} or 1")
    s.add_argument("--rays", type=int, default=0, metavar="MAX_PERIOD",
                   help="overlay parameter rays of all holes up to this period")
    s.add_argument("--ray-t-lo", type=_positive_float, default=1e-12)
    s.add_argument("--out", default="slice.ppm")

    r = sub.add_parser("ray", help="trace a dynamic or parameter ray to CSV")
    r.add_argument("--kind", choices=("dynamic", "parameter"), default="dynamic")
    r.add_argument("--lambda", dest="lam", default="0")
    r.add_argument("--b", default="0", help="b for dynamic rays")
    r.add_argument("--angle", required=True, help="exact angle p/q")
    r.add_argument("--t-hi", type=_positive_float, default=None)
    r.add_argument("--t-lo", type=_positive_float, default=None)
    r.add_argument("--steps", type=_positive_int, default=None)
    r.add_argument("--rho", type=float, default=None)
    r.add_argument("--out", default="-", help="CSV path, - for stdout")

    t = sub.add_parser("threads", help="enumerate periodic thread patterns (JSON)")
    t.add_argument("--period", type=_positive_int, required=True)
    t.add_argument("--out", default="-")

    c = sub.add_parser("sn", help="contraction-sequence trace (CSV)")
    c.add_argument("--q", type=float, default=0.4)
    c.add_argument("--b", type=_positive_float, default=2.0)
    c.add_argument("--s0", type=_positive_float, default=10.0)
    c.add_argument("--gaps", choices=("linear", "constant", "none"), default="linear")
    c.add_argument("--gap", type=_positive_int, default=1, help="gap size for --gaps constant")
    c.add_argument("--first", type=int, default=1, help="first bad index")
    c.add_argument("--n", type=int, default=10_000)
    c.add_argument("--epsilon", type=_positive_float, default=None)
    c.add_argument("--out", default="-")
    return p


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as e:
        raise OSError(f"cannot write {out}: {e.strerror}") from None


def _write_bytes(data: bytes, out: str) -> None:
    try:
        Path(out).write_bytes(data)
    except OSError as e:
        raise OSError(f"cannot write {out}: {e.strerror}") from None


def cmd_gap(args) -> int:
    svg_path = Path(args.out)
    json_path = svg_path.with_suffix(".json")
    if args.pqpg:
        holes = pqpg_holes(args.max_period)
        _write_bytes(pqpg_svg(holes).encode(), str(svg_path))
        _write_bytes(pqpg_json(holes, args.max_period).encode(), str(json_path))
        print(f"{len(holes)} holes up to period {args.max_period} -> {svg_path}, {json_path}")
        return EXIT_OK
    if args.depth < 0:
        raise UsageError("--depth must be >= 0")
    spec = major_from_hole(parse_hole(args.hole)) if args.hole else major_from_critical_tag(parse_angle(args.tag))
    gap = grow_gap(spec, args.depth)
    _write_bytes(gap_svg(gap).encode(), str(svg_path))
    _write_bytes(gap_json(gap).encode(), str(json_path))
    print(f"{len(gap.vertices)} vertices at depth {args.depth} -> {svg_path}, {json_path}")
    return EXIT_OK


def cmd_slice(args) -> int:
    lam = parse_lambda(args.lam)
    res = parse_resolution(args.res)
    window = Window.parse(args.window)
    workers = args.workers if args.workers is not None else default_workers()
    img = render_slice(lam, window, res, args.max_iter, workers)
    rgb = img.rgb()
    status = EXIT_OK
    if args.rays > 0:
        for h in pqpg_holes(args.rays):
            for theta in (h.hole.start, h.hole.end):
                try:
                    path = trace_parameter_ray(lam, theta, t_lo=args.ray_t_lo)
                except RayError as e:
                    print(f"warning: parameter ray {theta}: {e}", file=sys.stderr)
                    status = EXIT_NUMERIC
                    if e.partial is None:
                        continue
                    path = e.partial
                pts = [window.to_pixel(b, *res) for b in path.points]
                draw_polyline(rgb, pts)
    _write_bytes(ppm_bytes(rgb), args.out)
    print(f"{res[0]}x{res[1]} slice, {int(img.in_set.sum())} pixels in the set -> {args.out}")
    return status


def cmd_ray(args) -> int:
    theta = parse_angle(args.angle)
    lam = parse_lambda(args.lam)
    kw = {k: getattr(args, k) for k in ("t_hi", "t_lo", "steps", "rho") if getattr(args, k) is not None}
    try:
        if args.kind == "dynamic":
            b = parse_complex(args.b)
            path = trace_dynamic_ray(CubicMap(lam, b), theta, **kw)
        else:
            path = trace_parameter_ray(lam, theta, **kw)
    except RayError as e:
        text = e.partial.to_csv(failure=str(e)) if e.partial else f"t,re,im\n# partial: {e}\n"
        _emit(text, args.out)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(path.to_csv(), args.out)
    return EXIT_OK


def cmd_threads(args) -> int:
    pats = enumerate_periodic_patterns(args.period)
    _emit(patterns_to_json(pats, args.period) + "\n", args.out)
    return EXIT_OK


def cmd_sn(args) -> int:
    if not 0 < args.q < 1:
        raise UsageError("--q must lie in (0, 1)")
    if args.n < 0 or args.first < 0:
        raise UsageError("--n and --first must be non-negative")
    bad = bad_index_schedule(args.gaps, args.n, first=args.first, gap=args.gap)
    run = simulate_contraction(args.q, args.b, args.s0, bad, args.n, epsilon=args.epsilon)
    _emit(run.to_csv(), args.out)
    return EXIT_OK


_COMMANDS = {"gap": cmd_gap, "slice": cmd_slice, "ray": cmd_ray, "threads": cmd_threads, "sn": cmd_sn}


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in sub_action.choices.items():
        dests = {a.dest: a for a in sp._actions}
        overrides = {}
        for key, raw in values.items():
            if key == "lambda":
                key = "lam"
            act = dests.get(key)
            if act is None:
                continue
            if isinstance(act, argparse._StoreTrueAction):
                overrides[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    overrides[key] = act.type(raw) if act.type else raw
                except (ValueError, argparse.ArgumentTypeError) as e:
                    raise UsageError(f"config key {key}: {e}") from None
        sp.set_defaults(**overrides)


def _glue_negative_values(argv: list[str]) -> list[str]:
    # "--window -2,-2,2,2" would otherwise read the value as an option
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and re.match(r"-[\d.]", tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
