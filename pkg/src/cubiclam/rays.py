"""External rays of f(z) = lambda*z + b*z^2 + z^3, dynamic and in the b-plane.

Both tracers follow a ray from high potential down to low potential on a
geometric schedule ``t -> rho * t``. At potential t the sample is the Newton
solution of ``B(f^n(x)) = exp(3^n (t + 2 pi i theta))`` where ``B`` is the
truncated Boettcher expansion at infinity and n is the least iterate that
puts the target modulus above ``exp(TARGET_POTENTIAL)``. The angle ``3^n theta``
is reduced exactly before it is converted to a float.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

from .angles import Angle
from .cubic import (
    BOUNDED,
    CubicMap,
    boettcher_approx,
    critical_points,
    escape_iterations,
    green_potential,
)

__all__ = [
    "RayPath",
    "RayError",
    "NewtonDivergence",
    "PrecriticalCollision",
    "trace_dynamic_ray",
    "trace_parameter_ray",
    "landing_distance",
    "wake_membership",
    "cocritical_potential",
]

TARGET_POTENTIAL = 12.0
RHO = 0.9
MAX_RETRIES = 30
NEWTON_ITERS = 60
RESIDUAL_TOL = 1e-8
_ROUNDOFF_ULPS = 64
_ROUNDOFF_CAP = 1e-3
_COLLISION_TOL = 1e-4


class RayError(RuntimeError):
    """Ray tracing failed; ``partial`` holds the samples computed so far."""

    def __init__(
        self,
        message: str,
        partial: "RayPath | None" = None,
        bracket: tuple[float, float] | None = None,
    ):
        super().__init__(message)
        self.partial = partial
        # (t_fail, t_ok): the last potential tried and the last one reached
        self.bracket = bracket


class NewtonDivergence(RayError):
    pass


class PrecriticalCollision(RayError):
    pass


@dataclass(frozen=True)
class RayPath:
    kind: str  # "dynamic" or "parameter"
    angle: Angle
    lam: complex
    b: complex | None
    samples: tuple[tuple[float, complex], ...]
    residuals: tuple[float, ...] = field(default=(), compare=False)

    @property
    def endpoint(self) -> complex:
        return self.samples[-1][1]

    @property
    def potentials(self) -> list[float]:
        return [t for t, _ in self.samples]

    @property
    def points(self) -> list[complex]:
        return [z for _, z in self.samples]

    def to_csv(self, failure: str | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re", "im"])
        for t, z in self.samples:
            w.writerow([repr(t), repr(z.real), repr(z.imag)])
        if failure:
            buf.write(f"# partial: {failure}\n")
        return buf.getvalue()


def _iterations_for(t: float) -> int:
    n = 0
    while 3**n * t < TARGET_POTENTIAL:
        n += 1
    return n


def _target(t: float, theta: Angle, n: int) -> complex:
    turn = float(theta * 3**n)
    return cmath.exp(3**n * t + 2j * math.pi * turn)


def _schedule(t_hi: float, t_lo: float, rho: float | None, steps: int | None) -> list[float]:
    if not t_hi > t_lo > 0:
        raise ValueError("need t_hi > t_lo > 0")
    if steps is not None:
        if steps < 1:
            raise ValueError("steps must be >= 1")
        ratio = (t_lo / t_hi) ** (1 / steps)
        ts = [t_hi * ratio**j for j in range(steps)]
    else:
        r = RHO if rho is None else rho
        if not 0 < r < 1:
            raise ValueError("rho must lie in (0, 1)")
        ts = [t_hi]
        while ts[-1] * r > t_lo:
            ts.append(ts[-1] * r)
    ts.append(t_lo)
    return ts


def _newton(
    residual: Callable[[complex, int], tuple[complex, complex]],
    x0: complex,
    n: int,
    scale: float,
    roundoff: bool = False,
) -> tuple[complex, float] | None:
    """Solve residual(x) = 0 from x0; returns (x, relative residual) or None.

    With ``roundoff`` a residual is also accepted when it is no larger than
    what a one-ulp perturbation of x produces, i.e. x is as good as a double
    can make it.
    """
    x = x0
    for _ in range(NEWTON_ITERS):
        r, dr = residual(x, n)
        if not (math.isfinite(abs(r)) and math.isfinite(abs(dr))):
            return None
        if dr == 0:
            raise ZeroDivisionError
        step = r / dr
        # damp long jumps, which tend to land on spurious roots of the truncation
        cap = 0.25 * max(1.0, abs(x))
        if abs(step) > cap:
            step *= cap / abs(step)
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    r, dr = residual(x, n)
    rel = abs(r) / scale
    tol = RESIDUAL_TOL
    if roundoff:
        floor = _ROUNDOFF_ULPS * sys.float_info.epsilon * abs(dr) * max(1.0, abs(x)) / scale
        tol = max(tol, min(floor, _ROUNDOFF_CAP))
    # a stalled iteration with a large residual means the orbit has lost all
    # precision (deep iterates near a repelling cycle), not convergence
    return (x, rel) if rel < tol else None


def _follow(
    kind: str,
    theta: Angle,
    ts: list[float],
    x0: complex,
    solve: Callable,
    make_path: Callable[[list, list], RayPath],
    ctx=None,
) -> RayPath:
    # solve(x0, t, ctx) -> (x, residual, ctx) or None; ctx carries whatever
    # must follow the accepted samples only (e.g. which critical point escapes)
    samples: list[tuple[float, complex]] = []
    residuals: list[float] = []
    got = solve(x0, ts[0], ctx)
    if got is None:
        raise NewtonDivergence(f"{kind} ray {theta}: no start point at t={ts[0]}")
    x, res, ctx = got
    samples.append((ts[0], x))
    residuals.append(res)
    t_prev = ts[0]
    for t_next in ts[1:]:
        # walk to t_next, splitting the step in log-potential on failure
        t_cur, x_cur = t_prev, x
        retries = 0
        sub = [t_next]
        while sub:
            t_try = sub[-1]
            got = solve(x_cur, t_try, ctx)
            bad = got is None or abs(got[0] - x_cur) > 0.5 * max(abs(x_cur), 1e-300) + 1.0
            if bad:
                retries += 1
                if retries > MAX_RETRIES:
                    raise NewtonDivergence(
                        f"{kind} ray {theta}: Newton failed near t={t_try:.3e}",
                        make_path(samples, residuals),
                        (t_try, t_cur),
                    )
                sub.append(math.sqrt(t_cur * t_try))
                continue
            sub.pop()
            t_cur, (x_cur, res, ctx) = t_try, got
        x = x_cur
        samples.append((t_next, x))
        residuals.append(res)
        t_prev = t_next
    return make_path(samples, residuals)


def trace_dynamic_ray(
    f: CubicMap,
    theta: Angle,
    t_hi: float = 8.0,
    t_lo: float = 1e-6,
    steps: int | None = None,
    rho: float | None = None,
) -> RayPath:
    """Samples of the dynamic ray of angle theta, potential from t_hi to t_lo."""
    theta = Angle(theta)
    ts = _schedule(t_hi, t_lo, rho, steps)
    levels = _critical_levels(f, t_hi, t_lo)
    if levels:
        ts = sorted(set(ts) | {lv for lv, _, _ in levels}, reverse=True)

    def residual(z: complex, n: int) -> tuple[complex, complex]:
        dz = 1.0 + 0j
        w = z
        for _ in range(n):
            dz *= f.deriv(w)
            w = f(w)
        a, c = f.centered_coefficients
        u = w + f.b / 3
        db = 1 - a / (3 * u * u) - 2 * c / (3 * u**3)
        return boettcher_approx(f, w), db * dz

    def solve(z0: complex, t: float, ctx):
        n = _iterations_for(t)
        target = _target(t, theta, n)

        def shifted(z, n):
            val, d = residual(z, n)
            if d == 0:
                raise PrecriticalCollision(f"dynamic ray {theta} hits a precritical point")
            return val - target, d

        try:
            got = _newton(shifted, z0, n, abs(target), roundoff=True)
        except ZeroDivisionError:
            raise PrecriticalCollision(f"dynamic ray {theta} hits a precritical point") from None
        return None if got is None else (*got, None)

    # first guess from inverting the expansion to first order
    w = cmath.exp(ts[0] + 2j * math.pi * float(theta))
    a, _ = f.centered_coefficients
    z0 = w - f.b / 3 - a / (3 * w)

    def make_path(samples, residuals):
        return RayPath("dynamic", theta, f.lam, f.b, tuple(samples), tuple(residuals))

    try:
        path = _follow("dynamic", theta, ts, z0, solve, make_path)
    except NewtonDivergence as err:
        t_fail, t_ok = err.bracket or (0.0, 0.0)
        for level, _, _ in levels:
            if t_fail * (1 - 1e-9) <= level <= t_ok * (1 + 1e-9):
                raise PrecriticalCollision(
                    f"dynamic ray {theta} runs into a precritical point at t={level:.6e}",
                    err.partial,
                    err.bracket,
                ) from None
        raise
    # Newton continuation may slide through a precritical point instead of
    # failing; check the samples sitting exactly on the critical levels.
    at = dict(path.samples)
    for level, k, c in levels:
        w = at[level]
        for _ in range(k):
            w = f(w)
        if abs(w - c) < _COLLISION_TOL * max(1.0, abs(c)):
            keep = [i for i, (t, _) in enumerate(path.samples) if t > level]
            partial = make_path([path.samples[i] for i in keep], [path.residuals[i] for i in keep])
            raise PrecriticalCollision(
                f"dynamic ray {theta} runs into a precritical point at t={level:.6e}",
                partial,
                (level, level),
            )
    return path


def _critical_levels(f: CubicMap, t_hi: float, t_lo: float) -> list[tuple[float, int, complex]]:
    """(G(c) / 3^k, k, c) for escaping critical points c, inside (t_lo, t_hi).

    A ray can only bifurcate at an iterated preimage of an escaping critical
    point, so these are the only potentials where a collision is possible.
    """
    out = []
    for c in set(critical_points(f)):
        g = green_potential(f, c)
        k = 0
        while g > 0 and g / 3**k > t_lo:
            if g / 3**k < t_hi:
                out.append((g / 3**k, k, c))
            k += 1
    return out


def _escaping_critical(lam: complex, b: complex, near: complex | None) -> complex:
    w1, w2 = critical_points(CubicMap(lam, b))
    if near is None:
        f = CubicMap(lam, b)
        # the faster escaping point has the larger critical value
        return w1 if abs(f(w1)) > abs(f(w2)) else w2
    return w1 if abs(w1 - near) < abs(w2 - near) else w2


def cocritical_potential(lam: complex, b: complex) -> float:
    """Green potential of the co-critical point, G(f(w2)) / 3.

    This is the modulus part of the slice uniformization: along the
    parameter ray of any angle it equals the ray potential t.
    """
    f = CubicMap(lam, b)
    return green_potential(f, f(_escaping_critical(lam, b, None))) / 3


def _parameter_residual(lam: complex, b: complex, w2: complex, n: int):
    """B_b(f_b^n(v_b)) and its b-derivative, v_b the critical value at w2."""
    f = CubicMap(lam, b)
    v = f(w2)
    dv = w2 * w2  # f'(w2) = 0, so only the explicit b-dependence survives
    w, dw = v, dv
    for _ in range(n):
        dw = f.deriv(w) * dw + w * w
        w = f(w)
    a, c = f.centered_coefficients
    u = w + b / 3
    du = dw + 1 / 3
    da = -2 * b / 3
    dc = 2 * b * b / 9 - lam / 3 + 1 / 3
    val = u + a / (3 * u) + c / (3 * u * u)
    dval = du * (1 - a / (3 * u * u) - 2 * c / (3 * u**3)) + da / (3 * u) + dc / (3 * u * u)
    return val, dval


def _pick_parameter_branch(lam: complex, theta: Angle, t: float, candidates: list[complex]) -> complex:
    """Choose the b whose co-critical point lies on the dynamic ray of angle theta."""
    best, best_score = None, math.inf
    for b in candidates:
        f = CubicMap(lam, b)
        w2 = _escaping_critical(lam, b, None)
        co = -b - 2 * w2
        spread = abs(co - w2)
        try:
            ray = trace_dynamic_ray(f, theta, t_hi=max(8.0, 2 * t), t_lo=t * 1.001)
        except RayError:
            continue
        score = abs(ray.endpoint - co) / spread
        if score < best_score:
            best, best_score = b, score
    if best is None or best_score > 0.1:
        raise NewtonDivergence(f"parameter ray {theta}: cannot identify the co-critical branch")
    return best


def trace_parameter_ray(
    lam: complex,
    theta: Angle,
    t_hi: float = 4.0,
    t_lo: float = 1e-4,
    steps: int | None = None,
    rho: float | None = None,
) -> RayPath:
    """Samples b(t) of the parameter ray of angle theta in the lambda-slice.

    Along the ray the Boettcher coordinate of the co-critical point of
    f_{lambda, b(t)} equals exp(t + 2 pi i theta); equivalently the critical
    value sits at potential 3t and angle 3 theta, with the branch among the
    three cube roots fixed at the start and then carried by continuation.
    """
    theta = Angle(theta)
    lam = complex(lam)
    ts = _schedule(t_hi, t_lo, rho, steps)
    def solve_at(b0: complex, t: float, w2_guess: complex | None):
        n = _iterations_for(3 * t)
        target = _target(3 * t, theta * 3, n)
        track = {"w2": w2_guess}

        def residual(b, n):
            w2 = _escaping_critical(lam, b, track["w2"])
            track["w2"] = w2
            return _parameter_residual(lam, b, w2, n)

        def shifted(b, n):
            val, d = residual(b, n)
            return val - target, d

        try:
            got = _newton(shifted, b0, n, abs(target))
        except ZeroDivisionError:
            return None
        if got is None:
            return None
        return got[0], got[1], track["w2"]

    # three candidate starts, one per cube root; v ~ 4 b^3 / 27 for large b
    t0 = ts[0]
    big = cmath.exp(3 * t0 + 2j * math.pi * float(theta * 3))
    root = (27 * big / 4) ** (1 / 3)
    candidates = []
    for k in range(3):
        b0 = root * cmath.exp(2j * math.pi * k / 3)
        got = solve_at(b0, t0, None)
        if got is not None:
            candidates.append(got[0])
    if not candidates:
        raise NewtonDivergence(f"parameter ray {theta}: no start point at t={t0}")
    b_start = _pick_parameter_branch(lam, theta, t0, candidates)

    def make_path(samples, residuals):
        return RayPath("parameter", theta, lam, None, tuple(samples), tuple(residuals))

    w2 = _escaping_critical(lam, b_start, None)
    return _follow("parameter", theta, ts, b_start, solve_at, make_path, w2)


def landing_distance(r1: RayPath, r2: RayPath) -> float:
    return abs(r1.endpoint - r2.endpoint)


def wake_membership(
    lam: complex,
    b: complex,
    hole,
    tol: float,
    t_lo: float = 1e-12,
    max_iter: int = 2000,
) -> bool:
    """Whether the dynamic rays at t1 + 1/3 and t2 + 2/3 co-land within tol.

    ``hole`` is a parameter hole (an Arc or anything with a ``hole`` Arc).
    """
    arc = getattr(hole, "hole", hole)
    f = CubicMap(lam, b)
    for w in critical_points(f):
        if escape_iterations(f, w, max_iter) is not BOUNDED:
            raise ValueError("a critical orbit escapes; the Julia set is not connected")
    r1 = _trace_to_landing(f, arc.start + Angle(1, 3), t_lo)
    r2 = _trace_to_landing(f, arc.end + Angle(2, 3), t_lo)
    return landing_distance(r1, r2) < tol


# below this potential a ray that runs out of double precision counts as landed
LANDED_POTENTIAL = 1e-6


def _trace_to_landing(f: CubicMap, theta: Angle, t_lo: float) -> RayPath:
    try:
        return trace_dynamic_ray(f, theta, t_lo=t_lo)
    except NewtonDivergence as err:
        part = err.partial
        if part is None or isinstance(err, PrecriticalCollision) or part.potentials[-1] > LANDED_POTENTIAL:
            raise
        return part
