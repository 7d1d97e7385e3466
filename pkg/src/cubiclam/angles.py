"""Exact rational points of the circle R/Z and the covering maps x -> d*x.

Everything here is exact: angles are reduced fractions in [0, 1) and no
floating-point value is ever used to decide an order or an equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Union

__all__ = [
    "Angle",
    "Arc",
    "Chord",
    "FULL_CIRCLE",
    "FullCircle",
    "sigma",
    "preimages",
    "orbit",
    "orbit_type",
    "in_arc",
    "cyclic_order",
    "arc_image",
    "arc_preimage_components",
    "is_critical",
]

AngleLike = Union["Angle", Fraction, int, str]


class Angle:
    """A rational point of R/Z, stored as a reduced fraction in [0, 1)."""

    __slots__ = ("_n", "_d")

    def __init__(self, numerator: AngleLike = 0, denominator: int | None = None):
        if type(numerator) is int and (denominator is None or type(denominator) is int):
            n, d = numerator, 1 if denominator is None else denominator
        elif isinstance(numerator, Angle) and denominator is None:
            self._n, self._d = numerator._n, numerator._d
            return
        elif isinstance(numerator, float) or isinstance(denominator, float):
            raise TypeError("floating-point angles are not accepted; use p/q")
        else:
            q = Fraction(numerator) if denominator is None else Fraction(numerator, denominator)
            n, d = q.numerator, q.denominator
        if d == 0:
            raise ZeroDivisionError("angle denominator must be nonzero")
        if d < 0:
            n, d = -n, -d
        n %= d
        g = gcd(n, d)
        self._n, self._d = n // g, d // g

    @classmethod
    def _raw(cls, n: int, d: int) -> "Angle":
        # n/d must already be reduced with 0 <= n < d
        obj = object.__new__(cls)
        obj._n, obj._d = n, d
        return obj

    @classmethod
    def parse(cls, text: str) -> "Angle":
        """Parse ``"p/q"`` (optionally suffixed ``turn``) or an integer."""
        s = text.strip().lower()
        if s.endswith("turn"):
            s = s[:-4].strip()
        try:
            if "/" in s:
                p, _, q = s.partition("/")
                return cls(int(p), int(q))
            return cls(int(s))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"malformed angle {text!r}; expected p/q") from None

    @property
    def numerator(self) -> int:
        return self._n

    @property
    def denominator(self) -> int:
        return self._d

    @property
    def fraction(self) -> Fraction:
        return Fraction(self._n, self._d, _normalize=False)

    def __float__(self) -> float:
        return self._n / self._d

    def __add__(self, other: AngleLike) -> "Angle":
        o = other if isinstance(other, Angle) else Angle(other)
        return Angle(self._n * o._d + o._n * self._d, self._d * o._d)

    __radd__ = __add__

    def __sub__(self, other: AngleLike) -> "Angle":
        o = other if isinstance(other, Angle) else Angle(other)
        return Angle(self._n * o._d - o._n * self._d, self._d * o._d)

    def __rsub__(self, other: AngleLike) -> "Angle":
        return Angle(other) - self

    def __neg__(self) -> "Angle":
        return Angle(-self._n, self._d)

    def __mul__(self, k: int) -> "Angle":
        if not isinstance(k, int):
            return NotImplemented
        return Angle(self._n * k, self._d)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Angle):
            return self._n == other._n and self._d == other._d
        if isinstance(other, (int, Fraction)):
            return self == Angle(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._n, self._d))

    # Order of representatives in [0, 1); used for sorting only.
    def __lt__(self, other: "Angle") -> bool:
        o = other if isinstance(other, Angle) else Angle(other)
        return self._n * o._d < o._n * self._d

    def __le__(self, other: "Angle") -> bool:
        o = other if isinstance(other, Angle) else Angle(other)
        return self._n * o._d <= o._n * self._d

    def __gt__(self, other: "Angle") -> bool:
        return not self <= other

    def __ge__(self, other: "Angle") -> bool:
        return not self < other

    def __repr__(self) -> str:
        return f"Angle({self._n}/{self._d})"

    def __str__(self) -> str:
        return f"{self._n}/{self._d}"

    def to_json(self) -> list[int]:
        return [self._n, self._d]


def _frac(x: AngleLike) -> Fraction:
    if isinstance(x, Angle):
        return x.fraction
    if isinstance(x, float):
        raise TypeError("floating-point angles are not accepted")
    return Fraction(x)


def _dist(a: Angle, b: Angle) -> Fraction:
    """Positive-direction distance from a to b, in [0, 1)."""
    return (b - a).fraction


class FullCircle:
    """Marker for an arc image that covers the whole circle."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "FULL_CIRCLE"


FULL_CIRCLE = FullCircle()


@dataclass(frozen=True)
class Arc:
    """Open, positively oriented arc from ``start`` to ``end``."""

    start: Angle
    end: Angle

    def __post_init__(self):
        object.__setattr__(self, "start", Angle(self.start))
        object.__setattr__(self, "end", Angle(self.end))
        if self.start == self.end:
            raise ValueError("an arc needs distinct endpoints")

    @property
    def length(self) -> Fraction:
        return _dist(self.start, self.end)

    def __contains__(self, x: AngleLike) -> bool:
        return in_arc(self, Angle(x))

    def closure_contains(self, x: AngleLike) -> bool:
        x = Angle(x)
        return x == self.start or x == self.end or in_arc(self, x)

    def complement(self) -> "Arc":
        return Arc(self.end, self.start)

    def __str__(self) -> str:
        return f"({self.start}, {self.end})"


@dataclass(frozen=True)
class Chord:
    """Unordered pair of distinct angles, stored with ``a < b`` in [0, 1)."""

    a: Angle
    b: Angle

    def __post_init__(self):
        a, b = Angle(self.a), Angle(self.b)
        if a == b:
            raise ValueError("a chord needs distinct endpoints")
        if b < a:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def endpoints(self) -> tuple[Angle, Angle]:
        return self.a, self.b

    def __contains__(self, x: AngleLike) -> bool:
        x = Angle(x)
        return x == self.a or x == self.b

    def image(self, d: int) -> "Chord | Angle":
        """Image under ``sigma(d, .)``; a critical chord collapses to a point."""
        fa, fb = sigma(d, self.a), sigma(d, self.b)
        return fa if fa == fb else Chord(fa, fb)

    def crosses(self, other: "Chord") -> bool:
        """True iff the two chords meet in the open disk."""
        if set(self.endpoints) & set(other.endpoints):
            return False
        arc = Arc(self.a, self.b)
        return (other.a in arc) != (other.b in arc)

    def __str__(self) -> str:
        return f"{{{self.a}, {self.b}}}"


def _check_degree(d: int) -> None:
    if d not in (2, 3):
        raise ValueError(f"degree must be 2 or 3, got {d}")


def sigma(d: int, alpha: AngleLike) -> Angle:
    _check_degree(d)
    return Angle(alpha) * d


def preimages(d: int, alpha: AngleLike) -> list[Angle]:
    """The d solutions of ``d*x = alpha``, sorted by position in [0, 1)."""
    _check_degree(d)
    q = _frac(Angle(alpha))
    return [Angle((q + i) / d) for i in range(d)]


def orbit(d: int, alpha: AngleLike) -> list[Angle]:
    """Forward orbit of a rational angle up to (and excluding) its first repeat."""
    _check_degree(d)
    x = Angle(alpha)
    if d == 3 and x._d % 3:
        # purely periodic: walk the cycle without a dictionary
        out = [x]
        y = x * 3
        while y != x:
            out.append(y)
            y = y * 3
        return out
    seen: dict[Angle, int] = {}
    out: list[Angle] = []
    while x not in seen:
        seen[x] = len(out)
        out.append(x)
        x = x * d
    return out


def orbit_type(d: int, alpha: AngleLike) -> tuple[int, int]:
    """Return ``(preperiod, period)`` of a rational angle under x -> d*x.

    Works on the denominator directly: write ``den = d^k * m`` with
    ``gcd(m, d) = 1``; the preperiod is the number of multiplications needed to
    clear the ``d``-part and the period is the multiplicative order of d mod m.
    """
    _check_degree(d)
    x = Angle(alpha)
    den = x.denominator
    # d is prime here, so one factor at a time clears it.
    k = 0
    while den % d == 0:
        den //= d
        k += 1
    period = 1
    if den > 1:
        r = d % den
        while r != 1:
            r = (r * d) % den
            period += 1
    return k, period


def in_arc(arc: Arc, alpha: AngleLike) -> bool:
    """Strict membership in the open positively oriented arc."""
    x = alpha if isinstance(alpha, Angle) else Angle(alpha)
    s, e = arc.start, arc.end
    # offsets from s, scaled by the common denominator
    den = s._d * x._d * e._d
    ox = ((x._n * s._d - s._n * x._d) * e._d) % den
    oe = ((e._n * s._d - s._n * e._d) * x._d) % den
    return 0 < ox < oe


def cyclic_order(a: AngleLike, b: AngleLike, c: AngleLike) -> bool:
    """True iff b lies strictly inside the positive arc from a to c."""
    a, b, c = Angle(a), Angle(b), Angle(c)
    if a == b or b == c or a == c:
        raise ValueError("cyclic_order needs three distinct angles")
    return _dist(a, b) < _dist(a, c)


def arc_image(d: int, arc: Arc) -> Arc | FullCircle:
    """Image of an arc; arcs of length >= 1/d wrap and return FULL_CIRCLE."""
    _check_degree(d)
    if arc.length * d >= 1:
        return FULL_CIRCLE
    return Arc(sigma(d, arc.start), sigma(d, arc.end))


def arc_preimage_components(d: int, arc: Arc) -> list[Arc]:
    """The d disjoint arcs mapping one-to-one onto ``arc``."""
    _check_degree(d)
    step = Fraction(1, d)
    start = arc.start.fraction / d
    length = arc.length / d
    return [Arc(Angle(start + i * step), Angle(start + i * step + length)) for i in range(d)]


def is_critical(d: int, chord: Chord) -> bool:
    _check_degree(d)
    return sigma(d, chord.a) == sigma(d, chord.b)


