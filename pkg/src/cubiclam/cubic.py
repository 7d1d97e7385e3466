"""The slice family f(z) = lambda*z + b*z^2 + z^3: critical points, escape, potential."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "CubicMap",
    "Escaped",
    "BOUNDED",
    "critical_points",
    "escape_iterations",
    "green_potential",
    "boettcher_approx",
    "recurrence_diagnostic",
    "root_of_unity",
]

# |f^n(z)| beyond this counts as deep in the basin of infinity for the potential
_BIG = 1e8


def root_of_unity(p: int, q: int) -> complex:
    """exp(2 pi i p/q), exact at the quarter turns."""
    p %= q
    if 4 * p % q == 0:
        return (1, 1j, -1, -1j)[4 * p // q]
    return cmath.exp(2j * math.pi * p / q)


@dataclass(frozen=True)
class CubicMap:
    lam: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "b", complex(self.b))

    def __call__(self, z: complex) -> complex:
        return z * (self.lam + z * (self.b + z))

    def deriv(self, z: complex) -> complex:
        return self.lam + z * (2 * self.b + 3 * z)

    @property
    def escape_radius(self) -> float:
        # |f(z)| >= |z| (|z|^2 - |b||z| - |lam|) >= 2|z| once |z| >= R
        return max(2.0, abs(self.lam) + abs(self.b) + 2.0)

    @property
    def critical_points(self) -> tuple[complex, complex]:
        return critical_points(self)

    @property
    def centered_coefficients(self) -> tuple[complex, complex]:
        """(a, c) with f conjugate to u^3 + a u + c under u = z + b/3."""
        lam, b = self.lam, self.b
        return lam - b * b / 3, 2 * b**3 / 27 - lam * b / 3 + b / 3


class Escaped(int):
    """Iteration count at which an orbit left the escape disk."""

    def __repr__(self) -> str:
        return f"Escaped({int(self)})"


class _Bounded:
    def __repr__(self) -> str:
        return "BOUNDED"

    def __bool__(self) -> bool:
        return False


BOUNDED = _Bounded()


def _order_key(z: complex) -> tuple[float, float]:
    return (abs(z), cmath.phase(z))


def critical_points(f: CubicMap) -> tuple[complex, complex]:
    """Roots of 3z^2 + 2bz + lambda, smaller modulus first (ties by argument)."""
    b, lam = f.b, f.lam
    disc = cmath.sqrt(b * b - 3 * lam)
    r1, r2 = (-b - disc) / 3, (-b + disc) / 3
    # refine the smaller root from the product to avoid cancellation
    big, small = (r1, r2) if abs(r1) >= abs(r2) else (r2, r1)
    if big != 0:
        small = lam / (3 * big)
    pair = sorted((big, small), key=_order_key)
    return pair[0], pair[1]


def escape_iterations(f: CubicMap, z0: complex, max_iter: int):
    """First n <= max_iter with |f^n(z0)| > R, as ``Escaped(n)``, else ``BOUNDED``."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    r = f.escape_radius
    z = complex(z0)
    for n in range(max_iter + 1):
        if abs(z) > r:
            return Escaped(n)
        if n < max_iter:
            z = f(z)
    return BOUNDED


def boettcher_approx(f: CubicMap, w: complex) -> complex:
    """Three-term expansion of the Boettcher coordinate, valid for large |w|."""
    a, c = f.centered_coefficients
    u = w + f.b / 3
    return u + a / (3 * u) + c / (3 * u * u)


def green_potential(f: CubicMap, z: complex, max_iter: int = 500) -> float:
    """lim 3^-n log|f^n(z)|; 0 for points whose orbit stays bounded."""
    z = complex(z)
    r = f.escape_radius
    for n in range(max_iter + 1):
        if abs(z) > _BIG:
            return math.log(abs(boettcher_approx(f, z))) / 3**n
        if n == max_iter:
            break
        z = f(z)
    if abs(z) > r:
        # escaped but not yet far enough out: finish the climb
        n = max_iter
        while abs(z) <= _BIG:
            z = f(z)
            n += 1
        return math.log(abs(boettcher_approx(f, z))) / 3**n
    return 0.0


@dataclass(frozen=True)
class ReturnRow:
    radius: float
    return_time: int | None

    def to_json(self) -> dict:
        return {"radius": self.radius, "return_time": self.return_time}


def recurrence_diagnostic(
    f: CubicMap,
    horizon: int,
    radii: Sequence[float],
    critical: complex | None = None,
) -> list[ReturnRow]:
    """First return times of the free critical point to shrinking disks around itself.

    ``critical`` defaults to the critical point with the larger modulus. An
    orbit that escapes within the horizon is a precondition failure.
    """
    if any(r2 >= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    w = critical_points(f)[1] if critical is None else complex(critical)
    r = f.escape_radius
    orbit = []
    z = w
    for _ in range(horizon):
        z = f(z)
        if abs(z) > r:
            raise ValueError("critical orbit escapes; recurrence is undefined")
        orbit.append(z)
    rows = []
    for delta in radii:
        hit = next((n for n, z in enumerate(orbit, start=1) if abs(z - w) < delta), None)
        rows.append(ReturnRow(float(delta), hit))
    return rows
