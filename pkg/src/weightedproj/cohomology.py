"""Integral cohomology ring of CP^n(q) and Z_2 topology of RP^n(q).

All arithmetic is on Python ints.  The l-table is built by plain subset
enumeration, C(n+1, k+1) subsets for degree k, which is comfortable for
n <= 20.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations

from .core import ArgumentError, as_weights


class IntegralityError(ArithmeticError):
    """A structure constant failed to be an integer.  Always a bug."""


def l_value(q, k: int) -> int:
    """lcm over (k+1)-subsets of (product of weights) / (gcd of weights)."""
    q = as_weights(q)
    if not 1 <= k <= q.n:
        raise ArgumentError(f"k must lie in [1, {q.n}], got {k}")
    out = 1
    for sub in combinations(q.q, k + 1):
        out = math.lcm(out, math.prod(sub) // reduce(math.gcd, sub))
    return out


def l_table(q) -> tuple[int, ...]:
    q = as_weights(q)
    return tuple(l_value(q, k) for k in range(1, q.n + 1))


def _structure_constant(l: tuple[int, ...], n: int, k: int, j: int) -> int:
    if k < 1 or j < 1:
        raise ArgumentError(f"degrees must be positive, got ({k}, {j})")
    if k + j > n:
        return 0
    num = l[k - 1] * l[j - 1]
    c, rem = divmod(num, l[k + j - 1])
    if rem:
        raise IntegralityError(f"l_{k} l_{j} / l_{k + j} = {num}/{l[k + j - 1]} is not an integer")
    return c


def structure_constant(q, k: int, j: int) -> int:
    """Coefficient c with gamma_k gamma_j = c gamma_{k+j}; 0 when k + j > n."""
    q = as_weights(q)
    return _structure_constant(l_table(q), q.n, k, j)


@dataclass(frozen=True)
class CohomologyRing:
    n: int
    l: tuple[int, ...]
    c: dict[tuple[int, int], int] = field(hash=False)

    @classmethod
    def of(cls, q) -> "CohomologyRing":
        q = as_weights(q)
        l = l_table(q)
        c = {
            (k, j): _structure_constant(l, q.n, k, j)
            for k in range(1, q.n + 1)
            for j in range(1, q.n - k + 1)
        }
        return cls(q.n, l, c)

    def product(self, k: int, j: int) -> int:
        return _structure_constant(self.l, self.n, k, j)

    def boundary_pairs(self) -> list[tuple[int, int]]:
        """Pairs with k + j = n, where the two stated product rules overlap."""
        return [(k, j) for (k, j) in self.c if k + j == self.n]

    def matrix(self) -> list[list[int]]:
        """n x n table of products, zero where k + j > n."""
        return [[self.product(k, j) for j in range(1, self.n + 1)] for k in range(1, self.n + 1)]


def complex_profile(q) -> tuple[int, int]:
    """(Betti sum, integral cuplength) of CP^n(q): always (n + 1, n)."""
    n = as_weights(q).n
    return n + 1, n


@dataclass(frozen=True)
class RealProfile:
    r: int
    is_manifold: bool
    sb: int
    cl: int
    suspension_base: int | None


def real_profile(q) -> RealProfile:
    """Z_2 Betti sum and cuplength of RP^n(q), driven by the number of odd weights."""
    q = as_weights(q)
    n = q.n
    r = sum(1 for x in q.q if x % 2)
    if r == n + 1:
        return RealProfile(r, True, n + 1, n, None)
    if r == 0:
        # quotient by a trivial Z_2: the real sphere S^n itself
        return RealProfile(r, False, 2, 1, None)
    return RealProfile(r, False, r, 1 if r >= 2 else 0, r - 1)
