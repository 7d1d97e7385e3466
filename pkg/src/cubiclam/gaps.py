"""Quadratic sigma_3-invariant gaps and the principal quadratic parameter gap.

A quadratic invariant gap is pinned down by its major hole ``I``: its
boundary is the set of angles whose whole sigma_3-orbit stays out of ``I``.
Finite approximations keep the vertices whose denominators divide ``3^m`` or
``3^m - 1`` for ``m <= depth`` together with the forward orbits of the major's
endpoints.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .angles import Angle, Arc, Chord, in_arc, orbit, orbit_type, preimages, sigma

__all__ = [
    "GapKind",
    "GapSpec",
    "GapApprox",
    "PQPGHole",
    "Verdict",
    "major_from_critical_tag",
    "major_from_hole",
    "tag_is_admissible",
    "in_gap",
    "in_depth_universe",
    "grow_gap",
    "verify_two_to_one",
    "tau",
    "pqpg_holes",
    "hole_period",
    "critical_decoration_argument",
    "decoration_argument_step",
    "decoration_argument_preimages",
    "lands_in_kstar",
    "is_regular_tag",
    "regular_tags",
    "collapse_class",
]

THIRD = Fraction(1, 3)
HALF = Fraction(1, 2)


class GapKind(enum.Enum):
    REGULAR_CRITICAL = "regular_critical"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class GapSpec:
    """Major data of an invariant quadratic gap.

    ``major_hole`` is kept with its orientation: the two period-1 parameter
    holes give the same chord {0, 1/2} with opposite major holes.
    """

    kind: GapKind
    major: Chord
    major_hole: Arc
    tag: Angle | None = None
    hole: Arc | None = None
    # False when a critical tag fails the admissibility test (see tag_is_admissible).
    validated: bool = True

    def __post_init__(self):
        a, b = self.major_hole.start, self.major_hole.end
        if Chord(a, b) != self.major:
            raise ValueError("major hole endpoints must be the major's endpoints")
        length = self.major_hole.length
        if not THIRD <= length <= HALF:
            raise ValueError(f"major hole length {length} outside [1/3, 1/2]")

    @property
    def a(self) -> Angle:
        return self.major_hole.start

    @property
    def b(self) -> Angle:
        return self.major_hole.end

    def to_json(self) -> dict:
        out = {
            "kind": self.kind.value,
            "major": [self.major.a.to_json(), self.major.b.to_json()],
            "major_hole": [self.a.to_json(), self.b.to_json()],
            "validated": self.validated,
        }
        if self.tag is not None:
            out["tag"] = self.tag.to_json()
        if self.hole is not None:
            out["parameter_hole"] = [self.hole.start.to_json(), self.hole.end.to_json()]
        return out


@dataclass(frozen=True)
class GapApprox:
    spec: GapSpec
    depth: int
    vertices: tuple[Angle, ...]
    edges: tuple[Chord, ...] = field(default=())

    @cached_property
    def vertex_set(self) -> frozenset[Angle]:
        return frozenset(self.vertices)

    @cached_property
    def _tau_partition(self) -> tuple[Angle, Angle]:
        return _fixed_class_partition(self.spec)

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "depth": self.depth,
            "vertices": [v.to_json() for v in self.vertices],
            "edges": [[e.a.to_json(), e.b.to_json()] for e in self.edges],
        }


@dataclass(frozen=True)
class PQPGHole:
    hole: Arc
    period: int
    dual_major: Chord
    dual_major_hole: Arc

    def to_json(self) -> dict:
        return {
            "hole": [self.hole.start.to_json(), self.hole.end.to_json()],
            "period": self.period,
            "dual_major": [self.dual_major.a.to_json(), self.dual_major.b.to_json()],
            "dual_major_hole": [
                self.dual_major_hole.start.to_json(),
                self.dual_major_hole.end.to_json(),
            ],
        }


class Verdict(enum.Enum):
    IN_KSTAR = "in_kstar"
    MAJOR_ENDPOINT_ORBIT = "major_endpoint_orbit"
    OUTSIDE_GAP = "outside_gap"
    UNKNOWN = "unknown"


def tag_is_admissible(theta: Angle) -> bool:
    """Whether the critical value orbit avoids the open critical major hole.

    This is the exact finite test behind "theta belongs to Q": tags inside a
    hole of Q push the critical value 3*theta into (theta+1/3, theta+2/3).
    """
    theta = Angle(theta)
    hole = Arc(theta + THIRD, theta + 2 * THIRD)
    return all(not in_arc(hole, x) for x in orbit(3, theta * 3))


def major_from_critical_tag(theta: Angle) -> GapSpec:
    theta = Angle(theta)
    a, b = theta + THIRD, theta + 2 * THIRD
    return GapSpec(
        kind=GapKind.REGULAR_CRITICAL,
        major=Chord(a, b),
        major_hole=Arc(a, b),
        tag=theta,
        validated=tag_is_admissible(theta),
    )


def major_from_hole(hole: Arc) -> GapSpec:
    """Periodic major ``{t1 + 1/3, t2 + 2/3}`` of a parameter hole ``(t1, t2)``."""
    a = hole.start + THIRD
    b = hole.end + 2 * THIRD
    pre_a, per_a = orbit_type(3, a)
    pre_b, per_b = orbit_type(3, b)
    if pre_a or pre_b:
        raise ValueError(f"hole {hole}: shifted endpoints {a}, {b} are not periodic")
    if per_a != per_b:
        raise ValueError(f"hole {hole}: shifted endpoints have periods {per_a} != {per_b}")
    if a == b:
        raise ValueError(f"hole {hole} collapses to a point")
    major_hole = Arc(a, b)
    if not THIRD <= major_hole.length <= HALF:
        raise ValueError(
            f"hole {hole}: major hole length {major_hole.length} outside [1/3, 1/2]"
        )
    return GapSpec(GapKind.PERIODIC, Chord(a, b), major_hole, hole=hole)


def in_gap(spec: GapSpec, x: Angle) -> bool:
    """Exact test: the full forward orbit of x stays out of the open major hole."""
    hole = spec.major_hole
    return all(not in_arc(hole, y) for y in orbit(3, x))


def _major_orbit(spec: GapSpec) -> set[Angle]:
    return set(orbit(3, spec.a)) | set(orbit(3, spec.b))


def in_depth_universe(spec: GapSpec, x: Angle, depth: int) -> bool:
    """Whether x is one of the angles a depth-``depth`` approximation looks at."""
    x = Angle(x)
    if x in _major_orbit(spec):
        return True
    den = x.denominator
    p = 1
    for m in range(depth + 1):
        if p % den == 0 or (m >= 1 and (p - 1) % den == 0):
            return True
        p *= 3
    return False


def _pullback_tree(hole: Arc, depth: int) -> set[Angle]:
    """Angles k/3^m (m <= depth) reached by pulling 0 back outside the hole."""
    zero = Angle(0)
    if in_arc(hole, zero):
        return set()
    found = {zero}
    level = {zero}
    for _ in range(depth):
        level = {y for x in level for y in preimages(3, x) if not in_arc(hole, y)}
        found |= level
    return found


class _HoleTest:
    """Integer-only membership tests against one fixed open arc."""

    def __init__(self, hole: Arc):
        self.sn, self.sd = hole.start.numerator, hole.start.denominator
        length = hole.length
        self.ln, self.ld = length.numerator, length.denominator

    def offset(self, n: int, d: int) -> tuple[int, int]:
        # positive-direction distance from the arc start to n/d, as (num, den)
        den = d * self.sd
        return (n * self.sd - self.sn * d) % den, den

    def contains(self, n: int, d: int) -> bool:
        off, den = self.offset(n, d)
        return off > 0 and off * self.ld < self.ln * den

    def swallows(self, n: int, d: int) -> bool:
        """Whether the closed interval [n/d, (n+1)/d] lies inside the open arc."""
        off, den = self.offset(n, d)
        return off > 0 and (off + self.sd) * self.ld < self.ln * den


def _periodic_words(hole: Arc, depth: int) -> set[Angle]:
    """Periodic angles of period <= depth avoiding the hole, by pruned word search.

    A ternary word u of length j fixes the interval of angles whose expansion
    starts with u, and every suffix of u fixes the interval of the matching
    iterate. A branch is cut as soon as some iterate is forced into the hole.
    """
    test = _HoleTest(hole)
    found: set[Angle] = set()
    # suffixes[i] is the integer value of word[i:]
    suffixes: list[int] = []

    def visit(j: int) -> None:
        for i in range(j):
            if test.swallows(suffixes[i], 3 ** (j - i)):
                return
        den = 3**j - 1
        n = suffixes[0]
        rot = n % den
        for _ in range(j):
            if test.contains(rot, den):
                break
            rot = (3 * rot) % den
        else:
            found.add(Angle(n, den))
        if j < depth:
            for digit in (0, 1, 2):
                for i in range(j):
                    suffixes[i] = 3 * suffixes[i] + digit
                suffixes.append(digit)
                visit(j + 1)
                suffixes.pop()
                for i in range(j):
                    suffixes[i] = (suffixes[i] - digit) // 3

    for digit in (0, 1, 2):
        suffixes.append(digit)
        visit(1)
        suffixes.pop()
    return found


def grow_gap(spec: GapSpec, depth: int) -> GapApprox:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    verts = _major_orbit(spec)
    if depth > 0:
        verts |= _pullback_tree(spec.major_hole, depth)
        verts |= _periodic_words(spec.major_hole, depth)
    ordered = tuple(sorted(verts))
    edges = tuple(
        Chord(ordered[i], ordered[(i + 1) % len(ordered)])
        for i in range(len(ordered))
        if len(ordered) > 1
    )
    return GapApprox(spec, depth, ordered, edges)


def verify_two_to_one(gap: GapApprox) -> bool:
    """Check that sigma_3 restricted to the gap boundary is two-to-one.

    For every vertex v the preimages of v outside the open major hole are
    counted, identifying the two endpoints of a critical major. Each count must
    be exactly two, and any such preimage inside the depth universe must
    itself be listed; the vertex set must also be forward invariant.
    """
    if len(gap.vertices) < 4:
        raise ValueError("verify_two_to_one needs at least 4 vertices")
    spec = gap.spec
    hole = spec.major_hole
    vset = gap.vertex_set
    critical = spec.kind is GapKind.REGULAR_CRITICAL
    for v in gap.vertices:
        if in_arc(hole, v) or sigma(3, v) not in vset:
            return False
        pre = [x for x in preimages(3, v) if not in_arc(hole, x)]
        count = len(pre)
        if critical and spec.a in pre and spec.b in pre:
            count -= 1
        if count != 2:
            return False
        for x in pre:
            if x not in vset and in_depth_universe(spec, x, gap.depth):
                return False
    return True


def _first_hit(spec: GapSpec, x: Angle) -> tuple[int, Angle] | None:
    ends = (spec.a, spec.b)
    for j, y in enumerate(orbit(3, x)):
        if y in ends:
            return j, y
    return None


def collapse_class(spec: GapSpec, x: Angle) -> tuple[Angle, Angle]:
    """The edge of the gap through x as ``(start, end)``, or ``(x, x)``.

    An edge endpoint first lands on a major endpoint after j steps, and the
    edge's hole maps one-to-one onto the major hole, so its length is
    ``|I| / 3^j`` and it sits on the side matching the endpoint it lands on.
    """
    x = Angle(x)
    hit = _first_hit(spec, x)
    if hit is None:
        return x, x
    j, end = hit
    width = spec.major_hole.length / 3**j
    if end == spec.a:
        return x, x + width
    return x - width, x


def _fixed_class_partition(spec: GapSpec) -> tuple[Angle, Angle]:
    """Start points of the fixed class and of its sibling class.

    The collapsed boundary map is a degree-two covering, so exactly one class
    is fixed; it corresponds to the fixed angle 0 of sigma_2 and the other
    class over it corresponds to 1/2.
    """
    hole = spec.major_hole
    fixed = [Angle(0), Angle(1, 2)]
    classes = {collapse_class(spec, p) for p in fixed if not in_arc(hole, p)}
    if len(classes) != 1:
        raise ValueError("gap boundary does not have a unique fixed class")
    (f_cls,) = classes
    members = {f_cls[0], f_cls[1]}
    siblings = set()
    for p in members:
        for x in preimages(3, p):
            if x in members or in_arc(hole, x):
                continue
            siblings.add(collapse_class(spec, x))
    if len(siblings) != 1:
        raise ValueError("fixed class does not have a unique sibling class")
    (s_cls,) = siblings
    return f_cls[0], s_cls[0]


def _binary_value(digits: list[int], repeat_from: int) -> Angle:
    pre = digits[:repeat_from]
    per = digits[repeat_from:]
    value = Fraction(0)
    for i, d in enumerate(pre):
        value += Fraction(d, 2 ** (i + 1))
    n = len(per)
    word = 0
    for d in per:
        word = 2 * word + d
    value += Fraction(word, (2**n - 1) * 2 ** len(pre))
    return Angle(value)


def tau(gap: GapApprox, v: Angle) -> Angle:
    """Monotone semiconjugacy from the gap boundary to the sigma_2 circle.

    The boundary is cut at the fixed class (read as binary digit 0 onward) and
    at its sibling class (digit 1 onward); the value is the binary number
    spelled by the itinerary of v.
    """
    v = Angle(v)
    if v not in gap.vertex_set:
        raise ValueError(f"{v} is not a vertex of the gap")
    f_start, s_start = gap._tau_partition
    cut = (s_start - f_start).fraction
    path = orbit(3, v)
    repeat_from = path.index(sigma(3, path[-1]))
    digits = [0 if (x - f_start).fraction < cut else 1 for x in path]
    return _binary_value(digits, repeat_from)


def critical_decoration_argument(gap: GapApprox) -> Angle:
    """Quadratic argument of the critical decoration: tau of the major."""
    if not gap.vertices:
        raise ValueError("empty gap")
    spec = gap.spec
    ta, tb = tau(gap, spec.a), tau(gap, spec.b)
    if ta != tb:
        raise ValueError(f"tau disagrees on the major endpoints: {ta} != {tb}")
    return ta


def decoration_argument_step(alpha: Angle) -> Angle:
    return sigma(2, alpha)


def decoration_argument_preimages(alpha: Angle) -> tuple[Angle, Angle]:
    lo, hi = preimages(2, alpha)
    return lo, hi


def _periodic_points(period: int) -> Iterator[Angle]:
    den = 3**period - 1
    for k in range(den):
        x = Angle(k, den)
        if orbit_type(3, x)[1] == period:
            yield x


def _is_gap_major(spec: GapSpec, depth: int) -> bool:
    if not (in_gap(spec, spec.a) and in_gap(spec, spec.b)):
        return False
    gap = grow_gap(spec, depth)
    if len(gap.vertices) < 4 or not verify_two_to_one(gap):
        return False
    try:
        critical_decoration_argument(gap)
    except ValueError:
        return False
    return True


def pqpg_holes(max_period: int, depth: int | None = None) -> list[PQPGHole]:
    """All holes of the principal quadratic parameter gap of period <= max_period.

    Candidate periodic majors are pairs of equal-period angles whose positive
    arc has length in [1/3, 1/2]; a candidate survives if the gap it spans
    passes the two-to-one test at the given depth. Surviving majors are
    dualized to parameter holes ``(a - 1/3, b - 2/3)``.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    holes = []
    for p in range(1, max_period + 1):
        pts = list(_periodic_points(p))
        d = depth if depth is not None else max(6, 2 * p)
        for a in pts:
            for b in pts:
                if a == b:
                    continue
                length = (b - a).fraction
                if not THIRD <= length <= HALF:
                    continue
                spec = GapSpec(GapKind.PERIODIC, Chord(a, b), Arc(a, b))
                if not _is_gap_major(spec, d):
                    continue
                hole = Arc(a - THIRD, b - 2 * THIRD)
                spec = GapSpec(GapKind.PERIODIC, Chord(a, b), Arc(a, b), hole=hole)
                holes.append(PQPGHole(hole, p, spec.major, spec.major_hole))
    holes.sort(key=lambda h: h.hole.start)
    return holes


def hole_period(h: PQPGHole | Arc) -> int:
    hole = h.hole if isinstance(h, PQPGHole) else h
    p1 = orbit_type(3, hole.start + THIRD)
    p2 = orbit_type(3, hole.end + 2 * THIRD)
    if p1[1] != p2[1]:
        raise ValueError(f"malformed hole {hole}: periods {p1[1]} and {p2[1]} differ")
    return p1[1]


def lands_in_kstar(gap: GapApprox, alpha: Angle) -> Verdict:
    alpha = Angle(alpha)
    spec = gap.spec
    if not in_depth_universe(spec, alpha, gap.depth):
        return Verdict.UNKNOWN
    if alpha not in gap.vertex_set:
        return Verdict.OUTSIDE_GAP
    if _first_hit(spec, alpha) is not None:
        return Verdict.MAJOR_ENDPOINT_ORBIT
    return Verdict.IN_KSTAR


def gap_specs(holes: Iterable[PQPGHole]) -> list[GapSpec]:
    return [major_from_hole(h.hole) for h in holes]


def is_regular_tag(theta: Angle) -> bool:
    """Admissible tag that cannot be a hole endpoint of Q.

    Hole endpoints t1, t2 have t1 + 1/3 or t2 + 2/3 periodic; item-(1) majors
    come from the remaining points of Q.
    """
    theta = Angle(theta)
    if not tag_is_admissible(theta):
        return False
    return orbit_type(3, theta + THIRD)[0] > 0 and orbit_type(3, theta + 2 * THIRD)[0] > 0


def regular_tags(max_denominator: int) -> list[Angle]:
    """All regular tags with denominator <= max_denominator, sorted."""
    out = set()
    for d in range(1, max_denominator + 1):
        for k in range(d):
            theta = Angle(k, d)
            if theta.denominator == d and is_regular_tag(theta):
                out.add(theta)
    return sorted(out)
