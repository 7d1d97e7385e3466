"""Writers for the artifact formats: SVG chord diagrams, JSON, binary PPM."""
from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

from .angles import Angle, Chord
from .gaps import GapApprox, PQPGHole

__all__ = [
    "gap_svg",
    "pqpg_svg",
    "pqpg_json",
    "gap_json",
    "ppm_bytes",
    "draw_polyline",
]

_SIZE = 600
_R = 260.0


def _xy(a: Angle) -> tuple[float, float]:
    # counterclockwise from the positive real axis; SVG's y axis points down
    phi = 2 * math.pi * float(a)
    return _SIZE / 2 + _R * math.cos(phi), _SIZE / 2 - _R * math.sin(phi)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _line(ch: Chord, cls: str, extra: str = "") -> str:
    (x1, y1), (x2, y2) = _xy(ch.a), _xy(ch.b)
    return (
        f'<line class="{cls}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}"'
        f' data-a="{ch.a}" data-b="{ch.b}"{extra}/>'
    )


def _header(title: str) -> list[str]:
    c = _SIZE / 2
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_SIZE}" height="{_SIZE}"'
        f' viewBox="0 0 {_SIZE} {_SIZE}">',
        f"<title>{title}</title>",
        "<style>.circle{fill:none;stroke:#000;stroke-width:1}"
        ".edge{stroke:#1f4e9c;stroke-width:0.8}.major{stroke:#c0392b;stroke-width:1.6}"
        ".hole{stroke:#c0392b;stroke-width:1.2}.dual{stroke:#7f8c8d;stroke-width:0.8;stroke-dasharray:4 3}"
        ".label{font:10px sans-serif;fill:#333}</style>",
        f'<circle class="circle" cx="{_fmt(c)}" cy="{_fmt(c)}" r="{_fmt(_R)}"/>',
    ]


def gap_svg(gap: GapApprox) -> str:
    """Unit circle, the hull edges of the vertex set and the major."""
    out = _header(f"invariant quadratic gap, depth {gap.depth}")
    out.append('<polygon class="gap" fill="#dfe8f5" stroke="none" points="'
               + " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(_xy, gap.vertices)) + '"/>')
    for e in gap.edges:
        if e != gap.spec.major:
            out.append(_line(e, "edge"))
    out.append(_line(gap.spec.major, "major"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def pqpg_svg(holes: Sequence[PQPGHole], show_dual: bool = True) -> str:
    """One chord per hole of the parameter gap, annotated with its period."""
    out = _header(f"parameter gap holes, {len(holes)} holes")
    for h in holes:
        ch = Chord(h.hole.start, h.hole.end)
        out.append(_line(ch, "hole", f' data-period="{h.period}"'))
    if show_dual:
        for h in holes:
            out.append(_line(h.dual_major, "dual"))
    for h in holes:
        mid = Angle(h.hole.start) + Angle(h.hole.length / 2)
        phi = 2 * math.pi * float(mid)
        x = _SIZE / 2 + (_R + 14) * math.cos(phi)
        y = _SIZE / 2 - (_R + 14) * math.sin(phi)
        out.append(
            f'<text class="label" x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="middle">{h.period}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def pqpg_json(holes: Iterable[PQPGHole], max_period: int) -> str:
    holes = list(holes)
    return json.dumps(
        {"max_period": max_period, "count": len(holes), "holes": [h.to_json() for h in holes]},
        indent=2,
    ) + "\n"


def gap_json(gap: GapApprox) -> str:
    return json.dumps(gap.to_json(), indent=2) + "\n"


def ppm_bytes(rgb: np.ndarray) -> bytes:
    """Binary P6 with maxval 255."""
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ValueError("expected an HxWx3 uint8 array")
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(rgb).tobytes()


def draw_polyline(
    rgb: np.ndarray, points: Sequence[tuple[float, float]], color=(255, 64, 32)
) -> None:
    """Rasterize a polyline given in fractional pixel coordinates (x, y), in place."""
    h, w, _ = rgb.shape
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
        if n > 4 * (w + h):
            continue  # segment mostly off-image; skip rather than walk it
        for k in range(n + 1):
            s = k / n
            col = int(math.floor(x0 + s * (x1 - x0)))
            row = int(math.floor(y0 + s * (y1 - y0)))
            if 0 <= row < h and 0 <= col < w:
                rgb[row, col] = color

