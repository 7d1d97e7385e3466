"""Threads of pullback chains, the shift eta, and the contraction-sequence simulator.

A thread ``(0̄, m1, ..., mk)`` is stored as its strictly increasing positive
entries; the infinite string of zeros on the left is implicit.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Thread",
    "InfiniteThread",
    "PeriodicPattern",
    "ContractionRun",
    "FIXED_THREAD",
    "eta",
    "detect_period",
    "enumerate_periodic_patterns",
    "chain_shared_prefix",
    "bad_index_schedule",
    "simulate_contraction",
    "decay_envelope",
]


def _check_increasing(entries: Sequence[int], what: str) -> None:
    if any(e < 1 for e in entries):
        raise ValueError(f"{what} entries must be positive, got {list(entries)}")
    if any(b <= a for a, b in zip(entries, entries[1:])):
        raise ValueError(f"{what} entries must be strictly increasing, got {list(entries)}")


@dataclass(frozen=True)
class Thread:
    entries: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        _check_increasing(self.entries, "thread")

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return "(0̄" + "".join(f", {m}" for m in self.entries) + ")"


@dataclass(frozen=True)
class InfiniteThread:
    """Eventually periodic infinite thread.

    The entries are ``prefix`` followed by ``P + l*N + m_r`` for ``l >= 0`` and
    ``r = 1..k``, where ``P`` is the last prefix entry (0 if the prefix is
    empty), ``m_1 < ... < m_k`` is ``pattern`` and ``N = m_k``.
    """

    prefix: Thread
    pattern: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.prefix, Thread):
            object.__setattr__(self, "prefix", Thread(self.prefix))
        object.__setattr__(self, "pattern", tuple(self.pattern))
        if not self.pattern:
            raise ValueError("pattern must be non-empty")
        _check_increasing(self.pattern, "pattern")

    @classmethod
    def periodic(cls, pattern: Iterable[int]) -> "InfiniteThread":
        return cls(Thread(), tuple(pattern))

    @property
    def period_value(self) -> int:
        return self.pattern[-1]

    @property
    def base(self) -> int:
        return self.prefix.entries[-1] if self.prefix.entries else 0

    def terms(self) -> Iterator[int]:
        yield from self.prefix.entries
        base, n = self.base, self.period_value
        lap = 0
        while True:
            for m in self.pattern:
                yield base + lap * n + m
            lap += 1

    def head(self, count: int) -> list[int]:
        it = self.terms()
        return [next(it) for _ in range(count)]

    def normalized(self) -> "InfiniteThread":
        """Canonical form: minimal repeating block, shortest prefix."""
        n = self.period_value
        residues = {m % n for m in self.pattern}
        d = next(d for d in _divisors(n) if all((r + d) % n in residues for r in residues))
        pattern = tuple(m for m in self.pattern if m <= d)
        prefix = list(self.prefix.entries)
        k = len(pattern)
        # drop a trailing prefix block that is just the previous lap
        while len(prefix) >= k:
            earlier = prefix[-1] - d
            rest = prefix[: len(prefix) - k]
            if earlier < 0 or (rest[-1] if rest else 0) != earlier:
                break
            if prefix[len(prefix) - k:] != [earlier + m for m in pattern]:
                break
            prefix = rest
        return InfiniteThread(Thread(tuple(prefix)), pattern)

    def __str__(self) -> str:
        shown = ", ".join(map(str, self.head(len(self.prefix) + 2 * len(self.pattern))))
        return f"(0̄, {shown}, …)"


@dataclass(frozen=True)
class PeriodicPattern:
    pattern: tuple[int, ...]
    minimal_period: int

    def to_json(self) -> dict:
        return {"pattern": list(self.pattern), "minimal_period": self.minimal_period}


FIXED_THREAD = InfiniteThread.periodic((1,))


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def eta(t: Thread | InfiniteThread) -> Thread | InfiniteThread:
    """Shift induced by one application of the map: every entry drops by one.

    An entry that reaches 0 merges into the zero string on the left.
    """
    if isinstance(t, Thread):
        return Thread(tuple(m - 1 for m in t.entries if m > 1))
    # with an empty prefix the first lap of the pattern becomes the new prefix
    first = t.prefix.entries or t.pattern
    return InfiniteThread(Thread(tuple(m - 1 for m in first if m > 1)), t.pattern).normalized()


def detect_period(t: InfiniteThread) -> int | None:
    """Minimal N with eta^N(t) == t, or None if t is not eta-periodic.

    For a purely periodic thread the answer is the smallest d dividing the
    block length N such that the residues of the entries mod N are invariant
    under adding d, which is the law ``m_{lk+r} = lN + m_r`` at its finest.
    """
    target = t.normalized()
    if not target.prefix.entries:
        return target.period_value
    current = target
    for d in range(1, target.period_value + 1):
        current = eta(current)
        if current == target:
            return d
    return None


def satisfies_period_law(t: InfiniteThread, n: int, count: int = 64) -> bool:
    """Check ``m_j = l*n + m_r`` (j = l*k + r) on the first ``count`` entries."""
    entries = t.head(count)
    block = [m for m in entries if m <= n]
    if not block or block[-1] != n:
        return False
    k = len(block)
    padded = [0] + block
    for j, m in enumerate(entries, start=1):
        lap, r = divmod(j, k)
        if m != lap * n + padded[r]:
            return False
    return True


def enumerate_periodic_patterns(n: int) -> list[PeriodicPattern]:
    """All blocks ``0 < m_1 < ... < m_k = n`` with their minimal periods."""
    if n < 1:
        raise ValueError("N must be >= 1")
    out = []
    for k in range(n):
        for inner in combinations(range(1, n), k):
            pattern = inner + (n,)
            out.append(PeriodicPattern(pattern, detect_period(InfiniteThread.periodic(pattern))))
    out.sort(key=lambda p: (len(p.pattern), p.pattern))
    return out


def chain_shared_prefix(a: Thread, b: Thread) -> Thread:
    common = []
    for x, y in zip(a.entries, b.entries):
        if x != y:
            break
        common.append(x)
    return Thread(tuple(common))


@dataclass(frozen=True)
class ContractionRun:
    q: float
    b: float
    s0: float
    bad_indices: tuple[int, ...]
    trace: tuple[float, ...]
    epsilon: float | None = None
    envelope_gap: int | None = None
    envelope_holds: bool | None = None
    below_four_eps: bool | None = None
    notes: dict = field(default_factory=dict)

    def bad_values(self) -> list[float]:
        n = len(self.trace)
        return [self.trace[i] for i in self.bad_indices if i < n]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "s_n", "is_bad_index"])
        bad = set(self.bad_indices)
        for i, s in enumerate(self.trace):
            writer.writerow([i, repr(s), int(i in bad)])
        return buf.getvalue()


def bad_index_schedule(kind: str, n_max: int, first: int = 1, gap: int = 1) -> list[int]:
    """Bad indices up to ``n_max``.

    ``linear``: the i-th gap is i (1, 2, 3, ...); ``constant``: every gap is
    ``gap``; ``none``: no bad index at all.
    """
    if kind not in ("linear", "constant", "none"):
        raise ValueError(f"unknown schedule {kind!r}")
    if kind == "none":
        return []
    out = [first]
    i = 1
    while True:
        step = i if kind == "linear" else gap
        nxt = out[-1] + step
        if nxt > n_max:
            return out
        out.append(nxt)
        i += 1


def _envelope_gap(q: float, b: float, eps: float) -> int:
    n = 1
    while not (q**n < 1 / 8 and q ** (n - 1) * b < eps):
        n += 1
    return n


def simulate_contraction(
    q: float,
    b: float,
    s0: float,
    bad_indices: Sequence[int],
    n_max: int,
    epsilon: float | None = None,
) -> ContractionRun:
    """Run ``s_{n+1} = q s_n`` (good n) or ``s_{n+1} = 2 q s_n + b`` (bad n).

    The trace holds s_0 .. s_{n_max}. With ``epsilon`` set, the run also checks
    the estimate from the convergence argument: once consecutive bad indices
    are at least N apart, where ``q^N < 1/8`` and ``q^(N-1) b < epsilon``, the
    values at bad indices obey ``s_{n_{i+1}} <= s_{n_i} / 4 + epsilon``, and
    they end below ``4 epsilon``.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if b <= 0 or s0 <= 0:
        raise ValueError("b and s0 must be positive")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    bad = tuple(bad_indices)
    if any(y <= x for x, y in zip(bad, bad[1:])) or any(i < 0 for i in bad):
        raise ValueError("bad index schedule must be strictly increasing and non-negative")
    bad_set = set(bad)
    trace = [float(s0)]
    s = float(s0)
    for n in range(n_max):
        s = 2 * q * s + b if n in bad_set else q * s
        trace.append(s)
    run = ContractionRun(q, b, s0, bad, tuple(trace))
    if epsilon is None:
        return run

    big_n = _envelope_gap(q, b, epsilon)
    in_range = [i for i in bad if i <= n_max]
    # from the first bad index after which every gap is >= big_n
    start = len(in_range)
    for i in range(len(in_range) - 1, 0, -1):
        if in_range[i] - in_range[i - 1] < big_n:
            break
        start = i - 1
    holds = True
    for i in range(start, len(in_range) - 1):
        lo, hi = in_range[i], in_range[i + 1]
        if trace[hi] > trace[lo] / 4 + epsilon:
            holds = False
            break
    vals = [trace[i] for i in in_range[start:]]
    below = bool(vals) and vals[-1] < 4 * epsilon
    return ContractionRun(
        q, b, s0, bad, tuple(trace), epsilon, big_n, holds, below,
        notes={"envelope_start_index": in_range[start] if start < len(in_range) else None},
    )


def decay_envelope(c1: float, q: float, n: int) -> float:
    if c1 <= 0 or not 0 < q < 1 or n < 0:
        raise ValueError("need C1 > 0, 0 < q < 1, N >= 0")
    return c1 * q**n


def patterns_to_json(patterns: Sequence[PeriodicPattern], n: int) -> str:
    return json.dumps(
        {"N": n, "count": len(patterns), "patterns": [p.to_json() for p in patterns]},
        indent=2,
    )
