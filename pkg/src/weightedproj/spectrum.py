"""Spectrum of ``L u = mu grad K_q(u)`` on loops, and the counting certificate.

Eigenvalues are ``mu = 2 pi k / q_j``.  Internally every eigenvalue is held
as the exact rational ``k / q_j`` ("turns", i.e. units of 2 pi), so that
multiplicities and interval membership never depend on float ties.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count, islice

from .core import ArgumentError, as_weights

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, order=False)
class SpectralLine:
    k: int
    j: int  # 1-based coordinate index, in the weight vector's original order
    q_j: int

    @property
    def turns(self) -> Fraction:
        return Fraction(self.k, self.q_j)

    @property
    def mu(self) -> float:
        return TWO_PI * self.k / self.q_j

    def as_dict(self) -> dict:
        return {"k": self.k, "j": self.j, "q_j": self.q_j, "mu": self.mu}


def _as_turns(x) -> Fraction:
    """Convert a bound in radians to turns, snapping onto nearby simple rationals."""
    if isinstance(x, Fraction):
        return x
    f = float(x) / TWO_PI
    snapped = Fraction(f).limit_denominator(10**6)
    if abs(float(snapped) - f) <= 1e-12 * max(1.0, abs(f)):
        return snapped
    return Fraction(f)


def lines_between_turns(q, lo: Fraction, hi: Fraction, closed: bool = False) -> list[SpectralLine]:
    """Lines with ``lo < k/q_j <= hi`` (``lo <= k/q_j <= hi`` if ``closed``), exact."""
    q = as_weights(q)
    if lo >= hi:
        raise ArgumentError(f"empty interval: lo={lo} >= hi={hi}")
    lines = []
    for j, qj in enumerate(q.q, start=1):
        k_lo = math.ceil(lo * qj)
        if not closed and Fraction(k_lo, qj) == lo:
            k_lo += 1
        k_hi = math.floor(hi * qj)
        lines.extend(SpectralLine(k, j, qj) for k in range(k_lo, k_hi + 1))
    lines.sort(key=lambda ln: (ln.turns, ln.j, ln.k))
    return lines


def eigenvalues_in(q, lo: float, hi: float, half_open: bool = True) -> list[SpectralLine]:
    """All lines with mu in (lo, hi] (or [lo, hi] with ``half_open=False``).

    Bounds are in radians.  ``lo`` and ``hi`` may also be passed as
    :class:`fractions.Fraction`, in which case they are read as turns.
    """
    if not (isinstance(lo, Fraction) or isinstance(hi, Fraction)) and lo >= hi:
        raise ArgumentError(f"empty interval: lo={lo} >= hi={hi}")
    return lines_between_turns(q, _as_turns(lo), _as_turns(hi), closed=not half_open)


def positive_lines(q):
    """Positive lines in nondecreasing order, with multiplicity (infinite)."""
    q = as_weights(q)

    def stream(j, qj):
        for k in count(1):
            yield (Fraction(k, qj), j, k, qj)

    for _, j, k, qj in heapq.merge(*(stream(j, qj) for j, qj in enumerate(q.q, start=1))):
        yield SpectralLine(k, j, qj)


def mu_line(q, m: int) -> SpectralLine:
    if m < 1:
        raise ArgumentError(f"m must be >= 1, got {m}")
    return next(islice(positive_lines(q), m - 1, None))


def mu(q, m: int) -> float:
    """The m-th positive eigenvalue, counted with multiplicity."""
    return mu_line(q, m).mu


def minimax_bounds(q, M: float, m: int) -> tuple[float, float]:
    """Bracket ``mu_m - M <= c_m <= mu_m`` for the minimax value c_m, m >= 2.

    No bracket is produced for m = 1: the identity d_1 = mu_1 on which it
    would rest is not established.
    """
    if m <= 1:
        raise ArgumentError(
            "minimax bounds are only certified for m >= 2; the m = 1 case "
            "would need d_1 = mu_1, which is not established"
        )
    if M < 0:
        raise ArgumentError(f"bound M must be nonnegative, got {M}")
    top = mu(q, m)
    return top - M, top


@dataclass(frozen=True)
class CountingCertificate:
    weights: tuple[int, ...]
    M: float
    t0: int
    s: int
    interval_count: int
    ns_lower_bound: Fraction
    conclusion: int
    notes: tuple[str, ...] = field(default=())

    def check(self) -> None:
        """Raise AssertionError if any certificate invariant fails."""
        n1 = len(self.weights)
        assert self.t0 >= 1
        assert 2 * self.t0 * math.pi >= self.M
        assert self.t0 == 1 or 2 * (self.t0 - 1) * math.pi < self.M
        assert self.s > self.t0 + 1
        assert self.interval_count >= (self.s - self.t0 - 1) * n1
        assert self.ns_lower_bound == n1 - Fraction(self.t0 * n1, self.s - 1)
        if self.ns_lower_bound > n1 - 1:
            assert self.conclusion == n1

    def as_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "M": self.M,
            "t0": self.t0,
            "s": self.s,
            "interval_count": self.interval_count,
            "ns_lower_bound": str(self.ns_lower_bound),
            "ns_lower_bound_float": float(self.ns_lower_bound),
            "conclusion": self.conclusion,
            "notes": list(self.notes),
        }


def smallest_t0(M: float) -> int:
    """Smallest integer t0 >= 1 with M <= 2 t0 pi."""
    if M < 0:
        raise ArgumentError(f"bound M must be nonnegative, got {M}")
    t0 = max(1, math.ceil(M / TWO_PI))
    while t0 > 1 and M <= 2 * (t0 - 1) * math.pi:
        t0 -= 1
    while M > 2 * t0 * math.pi:
        t0 += 1
    return t0


def counting_certificate(q, M: float, s: int | None = None) -> CountingCertificate:
    """Reproduce the interval-counting argument that yields n + 1 classes mod 2 pi."""
    q = as_weights(q)
    n1 = q.dim
    t0 = smallest_t0(M)
    if s is None:
        s = t0 * n1 + 2
    if s <= t0 + 1:
        raise ArgumentError(f"s must exceed t0 + 1 = {t0 + 1}, got {s}")
    interval_count = len(lines_between_turns(q, Fraction(1 + t0), Fraction(s)))
    bound = n1 - Fraction(t0 * n1, s - 1)
    # N_s is an integer >= bound
    conclusion = min(n1, math.ceil(bound)) if bound > 0 else 0
    notes = []
    if max(q.q) < 2:
        notes.append("all weights equal 1: outside the standing assumption max q >= 2; arithmetic run verbatim")
    if bound <= n1 - 1:
        notes.append(f"s={s} too small to certify n+1; the minimal certifying s is {t0 * n1 + 2}")
    cert = CountingCertificate(q.q, float(M), t0, s, interval_count, bound, conclusion, tuple(notes))
    cert.check()
    return cert
