"""Circle-invariant polynomial Hamiltonians and their degree-two lift.

A Hamiltonian on CP^n(q) is given by real terms ``c(t) Re(z^alpha conj(z)^beta)``
with weighted degree ``sum (alpha_j - beta_j) q_j = 0``.  Writing
``rho = 2 K_q(z)`` and ``P_d`` for the part of total degree d, the lift
``H(z) = rho * P(z / sqrt(rho))`` is

    H(z) = sum_d rho^(1 - d/2) P_d(z),

which is what :meth:`LiftedHamiltonian.evaluate` computes, with the
gradient obtained from the same expression by the chain rule.

Symplectic convention: ``X_F(z) = i grad F(z)``, where ``grad`` is the real
gradient written as a complex vector (``grad |z|^2 = 2 z``).  Then
``X_{K_q}(z) = i q z`` and its flow is the weighted circle action.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .core import ArgumentError, as_weights, moment_map, WeightVector

DEFAULT_INFLATION = 0.05


class InvarianceError(ArgumentError):
    """A monomial is not invariant under the weighted circle action."""


@dataclass(frozen=True)
class InvariantMonomial:
    """``c(t) * Re(z^alpha * conj(z)^beta)``.

    ``coeff`` is a tuple of ``(kind, mode, amplitude)`` with kind ``"cos"`` or
    ``"sin"``; ``c(t) = sum amp * cos(2 pi mode t)`` (or sin).  A term and its
    mirror ``(beta, alpha)`` have the same real part, so the mirror is implied.
    """

    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    coeff: tuple[tuple[str, int, float], ...] = (("cos", 0, 1.0),)

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        beta = tuple(int(b) for b in self.beta)
        if len(alpha) != len(beta):
            raise ArgumentError("alpha and beta must have the same length")
        if any(a < 0 for a in alpha + beta):
            raise ArgumentError("exponents must be nonnegative")
        coeff = []
        for kind, mode, amp in self.coeff:
            if kind not in ("cos", "sin"):
                raise ArgumentError(f"unknown time coefficient kind {kind!r}")
            coeff.append((kind, int(mode), float(amp)))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "coeff", tuple(coeff))

    @property
    def degree(self) -> int:
        return sum(self.alpha) + sum(self.beta)

    @property
    def time_modes(self) -> int:
        return max((mode for _, mode, _ in self.coeff), default=0)

    @property
    def autonomous(self) -> bool:
        return all(mode == 0 for _, mode, _ in self.coeff)

    def weighted_degree(self, q) -> int:
        q = as_weights(q)
        return sum((a - b) * qj for a, b, qj in zip(self.alpha, self.beta, q.q))

    def time_factor(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for kind, mode, amp in self.coeff:
            trig = np.cos if kind == "cos" else np.sin
            out = out + amp * trig(2 * np.pi * mode * t)
        return out

    def monomial(self, z):
        return np.prod(z ** np.array(self.alpha), axis=-1) * np.prod(np.conj(z) ** np.array(self.beta), axis=-1)

    def grad_re_monomial(self, z):
        """Real gradient of Re(z^alpha conj(z)^beta), as a complex vector."""
        alpha = np.array(self.alpha)
        beta = np.array(self.beta)
        zc = np.conj(z)
        out = np.zeros_like(z)
        for j in range(z.shape[-1]):
            if alpha[j] == 0 and beta[j] == 0:
                continue
            e = np.zeros_like(alpha)
            e[j] = 1
            # d m / d z_j and d m / d conj(z_j)
            dz = alpha[j] * np.prod(z ** np.maximum(alpha - e, 0), axis=-1) * np.prod(zc**beta, axis=-1) if alpha[j] else 0.0
            dzc = beta[j] * np.prod(z**alpha, axis=-1) * np.prod(zc ** np.maximum(beta - e, 0), axis=-1) if beta[j] else 0.0
            out[..., j] = dzc + np.conj(dz)
        return out

    def as_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "time": [{kind: mode, "amp": amp} for kind, mode, amp in self.coeff],
        }


def _cutoff(k):
    """C^2 radial cutoff in the value of K_q: 1 for K <= 1, 0 for K >= 2."""
    u = np.clip(k - 1.0, 0.0, 1.0)
    return 1.0 - u**3 * (10 - 15 * u + 6 * u**2), -30.0 * u**2 * (1 - u) ** 2


@dataclass(frozen=True)
class LiftedHamiltonian:
    """Degree-two homogeneous, circle-invariant lift of a Hamiltonian on CP^n(q)."""

    terms: tuple[InvariantMonomial, ...]
    q: WeightVector
    cutoff: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", as_weights(self.q))
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if len(term.alpha) != self.q.dim:
                raise ArgumentError(f"term {term.as_dict()} has wrong length for weights {self.q}")
            if term.weighted_degree(self.q) != 0:
                raise InvarianceError(
                    f"term alpha={list(term.alpha)} beta={list(term.beta)} has weighted degree "
                    f"{term.weighted_degree(self.q)} != 0 for weights {self.q}"
                )

    @property
    def n(self) -> int:
        return self.q.n

    @property
    def max_degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    @property
    def time_modes(self) -> int:
        return max((t.time_modes for t in self.terms), default=0)

    @property
    def autonomous(self) -> bool:
        return self.time_modes == 0

    @cached_property
    def M(self) -> float:
        return hamiltonian_bound(self)

    @cached_property
    def _tables(self):
        T = len(self.terms)
        modes = self.time_modes + 1
        A = np.array([t.alpha for t in self.terms], dtype=int).reshape(T, self.q.dim)
        B = np.array([t.beta for t in self.terms], dtype=int).reshape(T, self.q.dim)
        deg = A.sum(axis=1) + B.sum(axis=1)
        ccos = np.zeros((T, modes))
        csin = np.zeros((T, modes))
        for i, term in enumerate(self.terms):
            for kind, mode, amp in term.coeff:
                (ccos if kind == "cos" else csin)[i, mode] += amp
        return A, B, deg.astype(float), ccos, csin

    def _time_factors(self, t):
        _, _, _, ccos, csin = self._tables
        ph = 2 * np.pi * np.multiply.outer(np.asarray(t, dtype=float), np.arange(ccos.shape[1]))
        return np.cos(ph) @ ccos.T + np.sin(ph) @ csin.T  # (..., T)

    def _parts(self, z, t, with_grad):
        A, B, deg, _, _ = self._tables
        zb = z[..., None, :]
        zc = np.conj(zb)
        Fz = zb**A
        Fzc = zc**B
        F = Fz * Fzc  # (..., T, D)
        mono = np.prod(F, axis=-1)
        c = self._time_factors(t)
        if not with_grad:
            return c, mono, None
        ones = np.ones_like(F[..., :1])
        before = np.cumprod(np.concatenate([ones, F[..., :-1]], axis=-1), axis=-1)
        after = np.flip(np.cumprod(np.concatenate([ones, np.flip(F[..., 1:], axis=-1)], axis=-1), axis=-1), axis=-1)
        excl = before * after
        dz = A * zb ** np.maximum(A - 1, 0) * Fzc * excl
        dzc = B * Fz * zc ** np.maximum(B - 1, 0) * excl
        return c, mono, dzc + np.conj(dz)

    def evaluate(self, z, t=0.0):
        """H_t(z); broadcasts over leading axes of ``z`` (and ``t``)."""
        z = np.asarray(z, dtype=complex)
        rho = 2.0 * moment_map(z, self.q)
        if not self.terms:
            total = np.zeros(np.broadcast_shapes(rho.shape, np.shape(t)))
            return total if total.ndim else 0.0
        zero = rho == 0
        rho_s = np.where(zero, 1.0, rho)
        deg = self._tables[2]
        c, mono, _ = self._parts(z, t, False)
        total = np.sum(c * rho_s[..., None] ** (1 - deg / 2) * mono.real, axis=-1)
        total = np.where(zero, 0.0, total)
        if self.cutoff:
            total = total * _cutoff(rho / 2)[0]
        return total if total.ndim else float(total)

    def gradient(self, z, t=0.0):
        """Real gradient of z -> H_t(z) as a complex vector; 0 at the origin."""
        z = np.asarray(z, dtype=complex)
        qa = self.q.array
        rho = 2.0 * moment_map(z, self.q)
        if not self.terms:
            return np.zeros(np.broadcast_shapes(z.shape, np.shape(t) + (1,)), dtype=complex)
        zero = rho == 0
        rho_s = np.where(zero, 1.0, rho)[..., None]
        deg = self._tables[2]
        c, mono, grad_re = self._parts(z, t, True)
        # d/dz of rho^(1 - d/2) Re m, summed over terms
        radial = np.sum(c * (1 - deg / 2) * rho_s ** (-deg / 2) * mono.real, axis=-1)
        grad = radial[..., None] * 2 * qa * z + np.sum((c * rho_s ** (1 - deg / 2))[..., None] * grad_re, axis=-2)
        grad = np.where(zero[..., None], 0.0, grad)
        if self.cutoff:
            chi, dchi = _cutoff(rho / 2)
            h = _uncut(self).evaluate(z, t)
            grad = chi[..., None] * grad + (np.asarray(h) * dchi)[..., None] * qa * z
        return grad

    def vector_field(self, z, t=0.0, lam: float = 0.0):
        """X_{H_t + lam K_q}(z) = i (grad H_t(z) + lam q z)."""
        return 1j * (self.gradient(z, t) + lam * self.q.array * np.asarray(z, dtype=complex))

    def shifted(self, c: float) -> "LiftedHamiltonian":
        """h + c on the quotient, i.e. H + 2 c K_q upstairs."""
        if c == 0:
            return self
        return LiftedHamiltonian(self.terms + (constant_term(self.q.dim, c),), self.q, self.cutoff, self.label)

    def to_spec(self) -> dict:
        return {"weights": list(self.q.q), "terms": [t.as_dict() for t in self.terms]}


def _uncut(H: LiftedHamiltonian) -> LiftedHamiltonian:
    return LiftedHamiltonian(H.terms, H.q, False, H.label)


def constant_term(dim: int, c: float) -> InvariantMonomial:
    return InvariantMonomial((0,) * dim, (0,) * dim, (("cos", 0, c),))


def lift(terms, q, cutoff: bool = False) -> LiftedHamiltonian:
    """Validate invariance and build the degree-two lift."""
    return LiftedHamiltonian(tuple(terms), as_weights(q), cutoff)


def quadratic(a, q) -> LiftedHamiltonian:
    """``H(z) = sum_j a_j |z_j|^2``; already homogeneous, so lifting is the identity."""
    q = as_weights(q)
    a = [float(x) for x in a]
    if len(a) != q.dim:
        raise ArgumentError(f"need {q.dim} coefficients, got {len(a)}")
    terms = []
    for j, aj in enumerate(a):
        if aj == 0:
            continue
        e = tuple(int(i == j) for i in range(q.dim))
        terms.append(InvariantMonomial(e, e, (("cos", 0, aj),)))
    return LiftedHamiltonian(tuple(terms), q, label="quadratic")


def zero(q) -> LiftedHamiltonian:
    return LiftedHamiltonian((), as_weights(q), label="zero")


def _term_from_dict(d: dict) -> InvariantMonomial:
    coeff = []
    for entry in d.get("time", [{"cos": 0, "amp": d.get("coeff", 1.0)}]):
        kinds = [k for k in ("cos", "sin") if k in entry]
        if len(kinds) != 1:
            raise ArgumentError(f"time entry needs exactly one of 'cos'/'sin': {entry}")
        coeff.append((kinds[0], int(entry[kinds[0]]), float(entry.get("amp", 1.0))))
    return InvariantMonomial(tuple(d["alpha"]), tuple(d["beta"]), tuple(coeff))


def from_spec(spec: dict) -> LiftedHamiltonian:
    """Build from the JSON layout ``{"weights": [...], "terms": [...]}``."""
    try:
        q = as_weights(spec["weights"])
        terms = tuple(_term_from_dict(t) for t in spec.get("terms", []))
    except KeyError as exc:
        raise ArgumentError(f"Hamiltonian spec is missing {exc}") from exc
    return LiftedHamiltonian(terms, q, bool(spec.get("cutoff", False)))


def load_spec(path) -> LiftedHamiltonian:
    return from_spec(json.loads(Path(path).read_text()))


def degree_report(spec: dict) -> list[dict]:
    """Per-term weighted-degree check, without raising."""
    q = as_weights(spec["weights"])
    out = []
    for raw in spec.get("terms", []):
        term = _term_from_dict(raw)
        wd = term.weighted_degree(q) if len(term.alpha) == q.dim else None
        out.append({"alpha": list(term.alpha), "beta": list(term.beta), "weighted_degree": wd, "invariant": wd == 0})
    return out


def _sphere_from_real(x, q: WeightVector):
    z = x[: q.dim] + 1j * x[q.dim : 2 * q.dim]
    r = math.sqrt(max(2.0 * float(moment_map(z, q)), 1e-300))
    return z / r


def hamiltonian_bound(H: LiftedHamiltonian, inflation: float = DEFAULT_INFLATION, samples: int = 4000, seed: int = 0) -> float:
    """M = 2 sup h over CP^n(q) x [0, 1], after shifting h to be nonnegative.

    The sup has no closed form for general polynomials; it is estimated by
    random sampling plus local refinement and inflated by ``inflation``.
    """
    if not H.terms:
        return 0.0
    q = H.q
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(samples, q.dim)) + 1j * rng.normal(size=(samples, q.dim))
    g /= np.sqrt(2.0 * moment_map(g, q))[:, None]
    coord = np.diag(1.0 / np.sqrt(q.array)).astype(complex)
    pts = np.vstack([coord, g])
    ts = np.linspace(0.0, 1.0, 4 * H.time_modes + 1, endpoint=not H.autonomous) if not H.autonomous else np.array([0.0])
    vals = np.array([H.evaluate(pts, t) for t in ts])  # (nt, npts)

    def refine(sign):
        flat = np.argsort(sign * vals, axis=None)[-8:]
        best = sign * vals.max() if sign > 0 else sign * vals.min()
        for idx in flat:
            it, ip = np.unravel_index(idx, vals.shape)
            z0 = pts[ip]
            x0 = np.concatenate([z0.real, z0.imag, [ts[it]]])

            def f(x):
                return -sign * H.evaluate(_sphere_from_real(x, q), x[-1] if not H.autonomous else 0.0)

            res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
            best = max(best, -res.fun)
        return sign * best

    hmax = refine(+1)
    hmin = refine(-1)
    top = hmax - min(hmin, 0.0)
    return 2.0 * top * (1.0 + inflation)
