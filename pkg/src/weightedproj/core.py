"""Weight vectors, the weighted circle and C* actions, and the moment map.

Points of CP^n(q) are always carried around as ambient lifts in C^{n+1};
lifts on the weighted sphere ``K_q = 1/2`` are the canonical ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

TOL_ZERO = 1e-12
TOL_SPHERE = 1e-10
TOL_ORBIT = 1e-8


class ArgumentError(ValueError):
    """Malformed or inconsistent arguments."""


class DomainError(ValueError):
    """Argument outside the domain of the operation (e.g. the zero vector)."""


@dataclass(frozen=True)
class WeightVector:
    """Positive integer weights ``q = (q_1, ..., q_{n+1})``, n >= 1."""

    q: tuple[int, ...]

    def __post_init__(self):
        q = tuple(int(x) for x in self.q)
        if any(x != y for x, y in zip(q, self.q)):
            raise ArgumentError(f"weights must be integers: {self.q!r}")
        if len(q) < 2:
            raise ArgumentError("need at least two weights (n >= 1)")
        if any(x < 1 for x in q):
            raise ArgumentError(f"weights must be positive: {q}")
        object.__setattr__(self, "q", q)

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        try:
            q = tuple(int(tok) for tok in text.split(",") if tok.strip())
        except ValueError as exc:
            raise ArgumentError(f"cannot parse weights {text!r}") from exc
        return cls(q)

    @property
    def n(self) -> int:
        return len(self.q) - 1

    @property
    def dim(self) -> int:
        return len(self.q)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.q, dtype=float)

    @property
    def sorted_desc(self) -> tuple[int, ...]:
        return tuple(sorted(self.q, reverse=True))

    @property
    def sort_permutation(self) -> tuple[int, ...]:
        # stable: equal weights keep their original relative order
        return tuple(sorted(range(self.dim), key=lambda i: -self.q[i]))

    @property
    def gcd(self) -> int:
        return reduce(math.gcd, self.q)

    @property
    def lcm(self) -> int:
        return reduce(math.lcm, self.q)

    @property
    def all_odd(self) -> bool:
        return all(x % 2 for x in self.q)

    def __str__(self):
        return ",".join(map(str, self.q))


def as_weights(q) -> WeightVector:
    if isinstance(q, WeightVector):
        return q
    if isinstance(q, str):
        return WeightVector.parse(q)
    return WeightVector(tuple(q))


def _as_point(z, q: WeightVector) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != q.dim:
        raise ArgumentError(f"point has {z.shape[-1]} coordinates, weights have {q.dim}")
    return z


def parse_point(text: str) -> np.ndarray:
    """Parse ``[[re, im], ...]`` JSON into a complex vector."""
    data = json.loads(text)
    try:
        return np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(f"expected a list of [re, im] pairs, got {text!r}") from exc


def moment_map(z, q) -> float | np.ndarray:
    """``K_q(z) = 1/2 sum_j q_j |z_j|^2``; broadcasts over leading axes."""
    q = as_weights(q)
    z = _as_point(z, q)
    return 0.5 * np.sum(q.array * np.abs(z) ** 2, axis=-1)


def moment_gradient(z, q) -> np.ndarray:
    """Real gradient of K_q written as a complex vector: ``(q_j z_j)_j``."""
    q = as_weights(q)
    return q.array * _as_point(z, q)


def circle_action(s, z, q) -> np.ndarray:
    """``A_s(z) = (e^{i q_j s} z_j)_j``."""
    q = as_weights(q)
    return np.exp(1j * q.array * s) * _as_point(z, q)


def _ipow(a: complex, k: int) -> complex:
    result = complex(1.0)
    base = complex(a)
    while k:
        if k & 1:
            result *= base
        base *= base
        k >>= 1
    return result


def weighted_scalar_action(alpha, z, q) -> np.ndarray:
    """``alpha . z = (alpha^{q_j} z_j)_j`` with exact integer powers."""
    q = as_weights(q)
    alpha = complex(alpha)
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    z = _as_point(z, q)
    return np.array([_ipow(alpha, qj) for qj in q.q]) * z


def orbifold_group_order(z, q, tol_zero: float = TOL_ZERO) -> int:
    """Order of the local group at [z]: gcd of the weights of nonzero coordinates."""
    q = as_weights(q)
    z = _as_point(z, q)
    support = [qj for qj, zj in zip(q.q, z) if abs(zj) > tol_zero]
    if not support:
        raise DomainError("z = 0 does not define a point of CP^n(q)")
    return reduce(math.gcd, support)


def on_sphere(z, q, tol: float = TOL_SPHERE) -> bool:
    return bool(abs(2.0 * moment_map(z, q) - 1.0) <= tol)


def normalize_to_sphere(z, q) -> tuple[float, np.ndarray]:
    """Split ``z = r * zp`` with ``r > 0`` and ``zp`` on S^{2n+1}(q)."""
    q = as_weights(q)
    z = _as_point(z, q)
    r = math.sqrt(2.0 * float(moment_map(z, q)))
    if r == 0.0:
        raise DomainError("cannot normalize the zero vector")
    return r, z / r


def _orbit_objective(s, coef, qa):
    # ||A_s a - b||^2 = const - 2 Re sum_j e^{i q_j s} a_j conj(b_j)
    return -2.0 * np.real(np.exp(1j * np.multiply.outer(s, qa)) @ coef)


def orbit_distance(a, b, q, tol: float = TOL_ORBIT) -> tuple[float, float]:
    """Chordal distance between the circle orbits of ``a`` and ``b``.

    Returns ``(d, s)`` with ``d = min_s ||A_s a - b||`` and ``s`` in
    [0, 2*pi) the minimizer.  When several minimizers tie (singular points,
    where the orbit is covered more than once) the smallest one is returned.
    """
    q = as_weights(q)
    a = _as_point(a, q)
    b = _as_point(b, q)
    qa = q.array
    coef = a * np.conj(b)

    n_grid = max(64, 32 * max(q.q))
    grid = np.linspace(0.0, 2 * np.pi, n_grid, endpoint=False)
    f = _orbit_objective(grid, coef, qa)
    is_min = (f <= np.roll(f, 1)) & (f <= np.roll(f, -1))

    candidates = []
    for s in grid[is_min]:
        # Newton on f'(s) = 0; f is a trigonometric polynomial
        for _ in range(30):
            e = np.exp(1j * qa * s) * coef
            d1 = 2.0 * np.real(np.sum(-1j * qa * e))
            d2 = 2.0 * np.real(np.sum(qa**2 * e))
            if d2 <= 0:
                break
            step = d1 / d2
            step = max(-np.pi / n_grid, min(np.pi / n_grid, step))
            s -= step
            if abs(step) < 1e-15:
                break
        s = float(np.mod(s, 2 * np.pi))
        if s >= 2 * np.pi - 1e-13:
            s = 0.0
        d = float(np.linalg.norm(circle_action(s, a, q) - b))
        candidates.append((d, s))

    d_min = min(d for d, _ in candidates)
    slack = max(1e-9, 1e-6 * tol)
    return min(((d, s) for d, s in candidates if d <= d_min + slack), key=lambda c: c[1])


def same_orbit(a, b, q, tol: float = TOL_ORBIT) -> bool:
    return orbit_distance(a, b, q)[0] <= tol


def coordinate_point(j: int, q) -> np.ndarray:
    """The sphere lift of the coordinate point [e_j] (0-based ``j``)."""
    q = as_weights(q)
    z = np.zeros(q.dim, dtype=complex)
    z[j] = 1.0 / math.sqrt(q.q[j])
    return z
