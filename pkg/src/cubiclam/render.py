"""Escape-time rendering of lambda-slices (b-plane) and of dynamical planes.

Work is split by pixel row. Each row runs the same vectorized code no matter
how many workers there are, and rows are assembled in order, so the output
does not depend on the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cubic import CubicMap

__all__ = [
    "Window",
    "SliceImage",
    "EscapeImage",
    "render_slice",
    "render_dynamic",
    "default_workers",
    "WORKERS_ENV",
]

WORKERS_ENV = "CUBICLAM_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class Window:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"empty window {self}")

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = text.split(",")
        if len(parts) != 4:
            raise ValueError(f"window must be xmin,ymin,xmax,ymax, got {text!r}")
        return cls(*(float(p) for p in parts))

    def pixel_centers(self, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
        """Real parts per column and imaginary parts per row (row 0 at the top)."""
        dx = (self.xmax - self.xmin) / width
        dy = (self.ymax - self.ymin) / height
        xs = self.xmin + (np.arange(width) + 0.5) * dx
        ys = self.ymax - (np.arange(height) + 0.5) * dy
        return xs, ys

    def pixel_of(self, z: complex, width: int, height: int) -> tuple[int, int]:
        """(row, col) of the pixel containing z."""
        col = int((z.real - self.xmin) / (self.xmax - self.xmin) * width)
        row = int((self.ymax - z.imag) / (self.ymax - self.ymin) * height)
        if not (0 <= row < height and 0 <= col < width):
            raise ValueError(f"{z} lies outside the window")
        return row, col

    def to_pixel(self, z: complex, width: int, height: int) -> tuple[float, float]:
        """Fractional (x, y) image coordinates of z."""
        x = (z.real - self.xmin) / (self.xmax - self.xmin) * width
        y = (self.ymax - z.imag) / (self.ymax - self.ymin) * height
        return x, y


def _iterate(z: np.ndarray, lam, b, radius: np.ndarray, max_iter: int) -> np.ndarray:
    """Escape counts (first n with |f^n z| > R) or -1 for orbits bounded in budget."""
    out = np.full(z.shape, -1, dtype=np.int32)
    idx = np.arange(z.size)
    z = z.copy()
    lam = np.broadcast_to(np.asarray(lam, dtype=complex), z.shape).copy()
    b = np.broadcast_to(np.asarray(b, dtype=complex), z.shape).copy()
    r = radius.copy()
    for n in range(max_iter + 1):
        esc = np.abs(z) > r
        if esc.any():
            out[idx[esc]] = n
            keep = ~esc
            idx, z, lam, b, r = idx[keep], z[keep], lam[keep], b[keep], r[keep]
            if idx.size == 0:
                break
        if n < max_iter:
            z = z * (lam + z * (b + z))
    return out


def _critical_pair(lam, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    disc = np.sqrt(b * b - 3 * lam)
    r1, r2 = (-b - disc) / 3, (-b + disc) / 3
    swap = np.abs(r1) < np.abs(r2)
    big = np.where(swap, r2, r1)
    small = np.where(swap, r1, r2)
    nz = big != 0
    small = np.where(nz, lam / (3 * np.where(nz, big, 1)), small)
    # smaller modulus first, ties by argument
    tie = np.abs(small) == np.abs(big)
    flip = tie & (np.angle(small) > np.angle(big))
    return np.where(flip, big, small), np.where(flip, small, big)


def _run_rows(row_fn: Callable[[int], np.ndarray], height: int, workers: int) -> np.ndarray:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        rows = [row_fn(j) for j in range(height)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row_fn, range(height)))
    return np.stack(rows)


def _check_resolution(resolution: tuple[int, int], max_iter: int) -> tuple[int, int]:
    w, h = resolution
    if w < 1 or h < 1:
        raise ValueError(f"resolution must be positive, got {w}x{h}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    return int(w), int(h)


@dataclass(frozen=True, eq=False)
class SliceImage:
    lam: complex
    window: Window
    width: int
    height: int
    max_iter: int
    escape1: np.ndarray  # per pixel: escape count of omega_1, -1 if bounded
    escape2: np.ndarray

    @property
    def in_set(self) -> np.ndarray:
        return (self.escape1 < 0) & (self.escape2 < 0)

    @property
    def first_escape(self) -> np.ndarray:
        big = np.iinfo(np.int32).max
        e1 = np.where(self.escape1 < 0, big, self.escape1)
        e2 = np.where(self.escape2 < 0, big, self.escape2)
        return np.where(self.in_set, -1, np.minimum(e1, e2))

    def rgb(self) -> np.ndarray:
        return escape_palette(self.first_escape, self.max_iter)


@dataclass(frozen=True, eq=False)
class EscapeImage:
    f: CubicMap
    window: Window
    width: int
    height: int
    max_iter: int
    escape: np.ndarray

    @property
    def in_set(self) -> np.ndarray:
        return self.escape < 0

    def rgb(self) -> np.ndarray:
        return escape_palette(self.escape, self.max_iter)


def escape_palette(counts: np.ndarray, max_iter: int) -> np.ndarray:
    """Black for -1, otherwise a blue-to-white ramp in log escape time."""
    n = np.where(counts < 0, 0, counts).astype(np.float64)
    s = np.log1p(n) / np.log1p(max_iter)
    s = np.clip(1.0 - s, 0.0, 1.0)
    rgb = np.empty(counts.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = np.round(255 * s**2).astype(np.uint8)
    rgb[..., 1] = np.round(255 * s**1.5).astype(np.uint8)
    rgb[..., 2] = np.round(80 + 175 * s).astype(np.uint8)
    rgb[counts < 0] = 0
    return rgb


def render_slice(
    lam: complex,
    window: Window,
    resolution: tuple[int, int],
    max_iter: int = 200,
    workers: int | None = None,
) -> SliceImage:
    """Classify both critical orbits of f_{lam, b} for b on a pixel grid."""
    w, h = _check_resolution(resolution, max_iter)
    lam = complex(lam)
    xs, ys = window.pixel_centers(w, h)

    def row(j: int) -> np.ndarray:
        b = xs + 1j * ys[j]
        c1, c2 = _critical_pair(lam, b)
        radius = np.maximum(2.0, abs(lam) + np.abs(b) + 2.0)
        return np.stack([_iterate(c1, lam, b, radius, max_iter), _iterate(c2, lam, b, radius, max_iter)])

    grid = _run_rows(row, h, default_workers() if workers is None else workers)
    return SliceImage(lam, window, w, h, max_iter, grid[:, 0, :].copy(), grid[:, 1, :].copy())


def render_dynamic(
    f: CubicMap,
    window: Window,
    resolution: tuple[int, int],
    max_iter: int = 200,
    workers: int | None = None,
) -> EscapeImage:
    """Escape counts of z on a pixel grid of the dynamical plane of f."""
    w, h = _check_resolution(resolution, max_iter)
    xs, ys = window.pixel_centers(w, h)
    radius = np.full(w, f.escape_radius)

    def row(j: int) -> np.ndarray:
        return _iterate(xs + 1j * ys[j], f.lam, f.b, radius, max_iter)

    grid = _run_rows(row, h, default_workers() if workers is None else workers)
    return EscapeImage(f, window, w, h, max_iter, grid)
