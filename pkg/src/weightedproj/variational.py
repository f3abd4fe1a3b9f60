"""Fourier-Galerkin critical points of the action on loops and on chords.

Periodic mode works with 1-periodic loops ``u(t) = sum_k u_k e^{2 pi i k t}``
and the functional

    Phi_H(u) = pi sum_k k |u_k|^2 - int_0^1 H_t(u(t)) dt.

Chord mode works with real combinations ``u(t) = sum_k c_k e^{pi i k t}``
(``c_k`` in R^{n+1}), whose endpoints u(0), u(1) are real, and

    J_H(u) = (pi / 2) sum_k k |c_k|^2 - int_0^1 H_t(u(t)) dt.

Both are restricted to ``S(q) = {int K_q(u) = 1} = {1/2 sum q_j |u_k^(j)|^2 = 1}``.
Gradients are taken for the plain L^2 pairing on coefficients, so the
quadratic part has gradient ``omega_k u_k`` with ``omega_k = 2 pi k``
(periodic) or ``pi k`` (chord), and the constraint gradient is ``q * u_k``.
A constrained critical point with multiplier ``lam`` solves
``-i u' = grad H_t(u) + lam q u``, and Euler's identity for the degree-two
functional gives ``Phi_H(u) = lam``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ArgumentError, WeightVector, as_weights, orbit_distance
from .hamiltonians import LiftedHamiltonian

PERIODIC = "periodic"
CHORD = "chord"
MODES = (PERIODIC, CHORD)

TOL_NEWTON = 1e-9
TOL_CLASS = 1e-6
MAX_DEGREE = 8
TIKHONOV_LEVELS = (1e-10, 1e-7, 1e-4)


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ArgumentError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def class_modulus(mode: str) -> float:
    return 2 * math.pi if _check_mode(mode) == PERIODIC else math.pi


@dataclass
class FourierLoop:
    """Truncated Fourier loop; ``coeffs[k + m]`` is the coefficient of mode k."""

    mode: str
    coeffs: np.ndarray

    def __post_init__(self):
        _check_mode(self.mode)
        c = np.asarray(self.coeffs)
        if c.ndim != 2 or c.shape[0] % 2 != 1:
            raise ArgumentError(f"coeffs must have shape (2m+1, n+1), got {c.shape}")
        if self.mode == CHORD:
            if np.iscomplexobj(c) and np.any(np.imag(c) != 0):
                raise ArgumentError("chord coefficients must be real")
            c = np.real(c).astype(float)
        else:
            c = c.astype(complex)
        self.coeffs = c

    @property
    def m(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    @property
    def real_dimension(self) -> int:
        return self.coeffs.size * (1 if self.mode == CHORD else 2)

    def basis(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        freq = 2 * np.pi if self.mode == PERIODIC else np.pi
        return np.exp(1j * freq * np.multiply.outer(t, self.ks))

    def __call__(self, t) -> np.ndarray:
        return self.basis(t) @ self.coeffs

    def to_vector(self) -> np.ndarray:
        if self.mode == CHORD:
            return self.coeffs.ravel().copy()
        return np.concatenate([self.coeffs.real.ravel(), self.coeffs.imag.ravel()])

    @classmethod
    def from_vector(cls, mode: str, m: int, dim: int, x) -> "FourierLoop":
        x = np.asarray(x, dtype=float)
        size = (2 * m + 1) * dim
        if mode == CHORD:
            return cls(mode, x.reshape(2 * m + 1, dim))
        return cls(mode, (x[:size] + 1j * x[size:]).reshape(2 * m + 1, dim))

    @classmethod
    def zeros(cls, mode: str, m: int, dim: int) -> "FourierLoop":
        dtype = float if mode == CHORD else complex
        return cls(mode, np.zeros((2 * m + 1, dim), dtype=dtype))

    @classmethod
    def eigen(cls, mode: str, m: int, q, k: int, j: int, amplitude: float | None = None) -> "FourierLoop":
        """``c e^{i w k t} e_j`` (0-based j), by default normalized onto S(q)."""
        q = as_weights(q)
        if abs(k) > m:
            raise ArgumentError(f"|k| = {abs(k)} exceeds truncation m = {m}")
        loop = cls.zeros(mode, m, q.dim)
        loop.coeffs[k + m, j] = math.sqrt(2.0 / q.q[j]) if amplitude is None else amplitude
        return loop

    def resized(self, m_new: int) -> "FourierLoop":
        """Zero-pad (or truncate) to order ``m_new``."""
        out = FourierLoop.zeros(self.mode, m_new, self.dim)
        lo = min(self.m, m_new)
        out.coeffs[m_new - lo : m_new + lo + 1] = self.coeffs[self.m - lo : self.m + lo + 1]
        return out

    def circle_action(self, s: float, q) -> "FourierLoop":
        """``T_s``: the weighted circle action applied to every coefficient."""
        if self.mode == CHORD:
            raise ArgumentError("the circle does not act on chords; use z2_action")
        q = as_weights(q)
        return FourierLoop(self.mode, self.coeffs * np.exp(1j * q.array * s))

    def z2_action(self, g: int, q) -> "FourierLoop":
        """``g . u = (g^{q_j} u_j)_j`` for g = +-1."""
        q = as_weights(q)
        return FourierLoop(self.mode, self.coeffs * np.array([g**qj for qj in q.q], dtype=float))

    def as_dict(self) -> dict:
        c = self.coeffs
        if self.mode == CHORD:
            coeffs = {int(k): [float(x) for x in c[k + self.m]] for k in self.ks}
        else:
            coeffs = {int(k): [[float(x.real), float(x.imag)] for x in c[k + self.m]] for k in self.ks}
        return {"mode": self.mode, "m": self.m, "coeffs": coeffs}


# --- quadrature -----------------------------------------------------------


def _node_count(m: int, H: LiftedHamiltonian) -> int:
    d = max(H.max_degree, 2)
    return max(4 * (m + d), 2 * (d + 1) * m + 4 * H.time_modes + 32)


def quadrature(mode: str, m: int, H: LiftedHamiltonian):
    """Nodes and weights on [0, 1].

    Periodic integrands get the uniform rule, which is exact for
    trigonometric polynomials below the node count; chord integrands are not
    periodic on [0, 1] and get Gauss-Legendre.
    """
    N = _node_count(m, H)
    if _check_mode(mode) == PERIODIC:
        return np.arange(N) / N, np.full(N, 1.0 / N)
    x, w = np.polynomial.legendre.leggauss(N)
    return 0.5 * (x + 1.0), 0.5 * w


class _Discretization:
    """Precomputed basis values for a (mode, m, H) triple."""

    def __init__(self, H: LiftedHamiltonian, mode: str, m: int):
        if H.max_degree > MAX_DEGREE:
            raise ArgumentError(f"Hamiltonian degree {H.max_degree} exceeds the cap {MAX_DEGREE}")
        self.H = H
        self.mode = _check_mode(mode)
        self.m = m
        self.dim = H.q.dim
        self.t, self.w = quadrature(mode, m, H)
        self.ks = np.arange(-m, m + 1)
        freq = 2 * np.pi if mode == PERIODIC else np.pi
        self.omega = freq * self.ks
        self.E = np.exp(1j * freq * np.multiply.outer(self.t, self.ks))  # (N, K)
        self.EH = np.conj(self.E).T * self.w  # (K, N)
        self.qa = H.q.array
        K = 2 * m + 1
        qk = np.tile(self.qa, K)
        self.Q = qk if mode == CHORD else np.concatenate([qk, qk])
        om = np.repeat(self.omega, self.dim)
        self.Om = om if mode == CHORD else np.concatenate([om, om])

    def loop(self, x) -> FourierLoop:
        return FourierLoop.from_vector(self.mode, self.m, self.dim, x)

    def values(self, x) -> np.ndarray:
        return self.E @ self.loop(x).coeffs

    def _project(self, g) -> np.ndarray:
        """L^2 projection of node values onto the truncated basis, as a real vector."""
        G = self.EH @ g
        if self.mode == CHORD:
            return G.real.ravel()
        return np.concatenate([G.real.ravel(), G.imag.ravel()])

    def functional(self, x) -> float:
        u = self.values(x)
        quad = 0.5 * float(np.dot(self.Om, x * x))
        return quad - float(np.dot(self.w, self.H.evaluate(u, self.t)))

    def constraint(self, x) -> float:
        return 0.5 * float(np.dot(self.Q, x * x))

    def gradient(self, x) -> np.ndarray:
        u = self.values(x)
        return self.Om * x - self._project(self.H.gradient(u, self.t))

    def hessian(self, x, step: float = 1e-6) -> np.ndarray:
        """Hessian of the functional; pointwise Hessians of H by central differences."""
        u = self.values(x)
        D = self.dim
        h = step * (1.0 + np.max(np.abs(u)))
        dirs = np.concatenate([np.eye(D), 1j * np.eye(D)]).astype(complex)  # (2D, D)
        up = u[None, :, :] + h * dirs[:, None, :]
        um = u[None, :, :] - h * dirs[:, None, :]
        dg = (self.H.gradient(up, self.t) - self.H.gradient(um, self.t)) / (2 * h)  # (2D, N, D)
        dgR, dgI = dg[:D], dg[D:]
        Er, Ei = self.E.real, self.E.imag
        EHw = self.EH.T  # (N, K), conj(E) * w
        # response of the projected gradient to a real unit coefficient at (k, j)
        re_col = np.einsum("ia,ib,jic->acbj", EHw, Er, dgR) + np.einsum("ia,ib,jic->acbj", EHw, Ei, dgI)
        K = 2 * self.m + 1
        n_c = K * D
        if self.mode == CHORD:
            Hh = re_col.real.reshape(n_c, n_c)
        else:
            im_col = np.einsum("ia,ib,jic->acbj", EHw, -Ei, dgR) + np.einsum("ia,ib,jic->acbj", EHw, Er, dgI)
            Hh = np.block(
                [
                    [re_col.real.reshape(n_c, n_c), im_col.real.reshape(n_c, n_c)],
                    [re_col.imag.reshape(n_c, n_c), im_col.imag.reshape(n_c, n_c)],
                ]
            )
        Hh = 0.5 * (Hh + Hh.T)
        return np.diag(self.Om) - Hh


# --- public functional API -----------------------------------------------


def _disc(u: FourierLoop, H: LiftedHamiltonian) -> _Discretization:
    if u.dim != H.q.dim:
        raise ArgumentError(f"loop has {u.dim} coordinates, Hamiltonian has {H.q.dim}")
    return _Discretization(H, u.mode, u.m)


def phi(u: FourierLoop, H: LiftedHamiltonian) -> float:
    """Action functional Phi_H on a periodic loop."""
    if u.mode != PERIODIC:
        raise ArgumentError("phi is defined on periodic loops; use chord_functional for chords")
    return _disc(u, H).functional(u.to_vector())


def chord_functional(u: FourierLoop, H: LiftedHamiltonian) -> float:
    """J_H on a chord."""
    if u.mode != CHORD:
        raise ArgumentError("chord_functional needs a chord-mode loop")
    return _disc(u, H).functional(u.to_vector())


def functional(u: FourierLoop, H: LiftedHamiltonian) -> float:
    return _disc(u, H).functional(u.to_vector())


def constraint(u: FourierLoop, q) -> float:
    """int_0^1 K_q(u(t)) dt, computed exactly by Parseval."""
    q = as_weights(q)
    return 0.5 * float(np.sum(q.array * np.abs(u.coeffs) ** 2))


def constraint_gradient(u: FourierLoop, q) -> FourierLoop:
    """Diagonal: ``u_k -> q * u_k``; never mixes modes or coordinates."""
    q = as_weights(q)
    return FourierLoop(u.mode, u.coeffs * q.array)


def gradient(u: FourierLoop, H: LiftedHamiltonian) -> FourierLoop:
    d = _disc(u, H)
    return d.loop(d.gradient(u.to_vector()))


def gradient_phi(u: FourierLoop, H: LiftedHamiltonian) -> FourierLoop:
    """L^2 gradient of Phi_H: ``2 pi k u_k`` minus the k-th coefficient of grad H_t(u(t))."""
    if u.mode != PERIODIC:
        raise ArgumentError("gradient_phi is defined on periodic loops")
    return gradient(u, H)


# --- Newton solver --------------------------------------------------------


@dataclass
class CriticalSolution:
    loop: FourierLoop
    lam: float
    value: float
    residual: float
    class_modulus: float
    lambda_class: float
    constraint: float
    iterations: int = 0
    seed: str = field(default="", compare=False)

    def as_dict(self, coefficients: bool = True) -> dict:
        out = {
            "lambda": self.lam,
            "value": self.value,
            "residual": self.residual,
            "class_modulus": self.class_modulus,
            "lambda_class": self.lambda_class,
            "constraint": self.constraint,
            "iterations": self.iterations,
            "seed": self.seed,
        }
        if coefficients:
            out["loop"] = self.loop.as_dict()
        return out


def lambda_class(lam: float, modulus: float) -> float:
    c = math.fmod(lam, modulus)
    if c < 0:
        c += modulus
    if c >= modulus - 1e-12:
        c = 0.0
    return c


def class_distance(a: float, b: float, modulus: float) -> float:
    d = abs(a - b) % modulus
    return min(d, modulus - d)


def _newton(d: _Discretization, x, tol: float, max_iter: int, damping: float):
    Q = d.Q
    x = x / math.sqrt(d.constraint(x))
    for it in range(max_iter + 1):
        g = d.gradient(x)
        qx = Q * x
        lam = float(np.dot(g, qx) / np.dot(qx, qx))
        res = float(np.linalg.norm(g - lam * qx))
        if not np.isfinite(res):
            return None
        if res <= tol:
            return x, lam, res, it
        if it == max_iter:
            break
        Hs = d.hessian(x)
        n = x.size
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = Hs - lam * np.diag(Q)
        J[:n, n] = -qx
        J[n, :n] = qx
        F = np.concatenate([g - lam * qx, [d.constraint(x) - 1.0]])
        if damping:
            delta = np.linalg.solve(J.T @ J + damping * np.eye(n + 1), -J.T @ F)
        else:
            delta = np.linalg.lstsq(J, -F, rcond=1e-12)[0]
        x = x + delta[:n]
        c = d.constraint(x)
        if not np.isfinite(c) or c <= 0:
            return None
        x = x / math.sqrt(c)
    return None


def solve_critical(
    H: LiftedHamiltonian,
    seed: FourierLoop,
    mode: str | None = None,
    tol: float = TOL_NEWTON,
    max_iter: int = 40,
) -> CriticalSolution | None:
    """Newton iteration for a critical point of the functional on S(q) near ``seed``.

    Returns None when no level of Tikhonov damping converges.
    """
    mode = _check_mode(mode or seed.mode)
    if seed.mode != mode:
        raise ArgumentError(f"seed is a {seed.mode} loop, mode is {mode}")
    d = _disc(seed, H)
    x0 = seed.to_vector()
    if d.constraint(x0) <= 0:
        raise ArgumentError("seed must be nonzero")
    for damping in (0.0,) + TIKHONOV_LEVELS:
        out = _newton(d, x0, tol, max_iter, damping)
        if out is not None:
            break
    else:
        return None
    x, lam, res, it = out
    modulus = class_modulus(mode)
    return CriticalSolution(
        loop=d.loop(x),
        lam=lam,
        value=d.functional(x),
        residual=res,
        class_modulus=modulus,
        lambda_class=lambda_class(lam, modulus),
        constraint=d.constraint(x),
        iterations=it,
    )


# --- enumeration ----------------------------------------------------------


def eigen_seeds(mode: str, m: int, q):
    """All ``(k, j)`` eigen-directions with |k| <= m, ordered by |k| then sign then j."""
    q = as_weights(q)
    order = [0] + [s * k for k in range(1, m + 1) for s in (1, -1)]
    for k in order:
        for j in range(q.dim):
            yield f"eigen(k={k},j={j + 1})", FourierLoop.eigen(mode, m, q, k, j)


def random_seed(mode: str, m: int, q, rng) -> FourierLoop:
    q = as_weights(q)
    ks = np.arange(-m, m + 1)
    decay = (1.0 / (1.0 + np.abs(ks)) ** 2)[:, None]
    c = rng.normal(size=(2 * m + 1, q.dim))
    if mode == PERIODIC:
        c = c + 1j * rng.normal(size=(2 * m + 1, q.dim))
    c = c * decay
    loop = FourierLoop(mode, c)
    return FourierLoop(mode, loop.coeffs / math.sqrt(constraint(loop, q)))


def same_solution(a: CriticalSolution, b: CriticalSolution, q: WeightVector, tol: float = 1e-6) -> bool:
    """Equal multiplier class and loops related by T_s (periodic) or the Z_2 action (chord)."""
    if class_distance(a.lambda_class, b.lambda_class, a.class_modulus) > TOL_CLASS:
        return False
    ua, ub = a.loop, b.loop
    if ua.m != ub.m:
        return False
    if ua.mode == CHORD:
        return min(
            np.linalg.norm(ua.coeffs - ub.coeffs), np.linalg.norm(ua.z2_action(-1, q).coeffs - ub.coeffs)
        ) <= tol
    tiled = WeightVector(q.q * (2 * ua.m + 1))
    return orbit_distance(ua.coeffs.ravel(), ub.coeffs.ravel(), tiled)[0] <= tol


@dataclass
class Enumeration:
    mode: str
    m: int
    solutions: list[CriticalSolution]
    classes: list[float]
    seeds_tried: int
    converged: int
    bound: int

    @property
    def count(self) -> int:
        return len(self.classes)

    @property
    def summary(self) -> str:
        status = "found >= bound" if self.count >= self.bound else "found < bound (search incomplete)"
        return f"distinct classes: {self.count} (lower bound n+1 = {self.bound}); {status}"


def _solve_job(args):
    H, label, seed, tol = args
    sol = solve_critical(H, seed, tol=tol)
    if sol is not None:
        sol.seed = label
    return sol


def distinct_classes(solutions, modulus: float, tol: float = TOL_CLASS) -> list[float]:
    classes: list[float] = []
    for c in sorted(s.lambda_class for s in solutions):
        if not any(class_distance(c, k, modulus) <= tol for k in classes):
            classes.append(c)
    return classes


def enumerate_solutions(
    H: LiftedHamiltonian,
    mode: str,
    m: int = 8,
    budget: int = 256,
    rng_seed: int = 0,
    tol: float = TOL_NEWTON,
    workers: int = 1,
) -> Enumeration:
    """Solve from eigen-seeds, then random seeds, and group by multiplier class."""
    q = H.q
    _check_mode(mode)
    if m < 2:
        raise ArgumentError("truncation m must be >= 2")
    if budget < q.dim:
        raise ArgumentError(f"budget must be >= n+1 = {q.dim}")
    seeds = []
    for label, loop in eigen_seeds(mode, m, q):
        if len(seeds) >= budget:
            break
        seeds.append((label, loop))
    rng = np.random.default_rng(rng_seed)
    i = 0
    while len(seeds) < budget:
        seeds.append((f"random({i})", random_seed(mode, m, q, rng)))
        i += 1
    jobs = [(H, label, loop, tol) for label, loop in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(_solve_job, jobs))
    else:
        found = [_solve_job(job) for job in jobs]
    converged = [s for s in found if s is not None]
    unique: list[CriticalSolution] = []
    for sol in converged:
        if not any(same_solution(sol, u, q) for u in unique):
            unique.append(sol)
    unique.sort(key=lambda s: (round(s.lambda_class, 9), round(s.lam, 9), s.seed))
    modulus = class_modulus(mode)
    return Enumeration(mode, m, unique, distinct_classes(unique, modulus), len(seeds), len(converged), q.dim)


def ladder(
    H: LiftedHamiltonian,
    seed: FourierLoop,
    levels=(4, 8, 16, 32),
    tol: float = TOL_NEWTON,
) -> list[CriticalSolution | None]:
    """Track one solution through the truncation ladder, seeding each level with the previous one."""
    out: list[CriticalSolution | None] = []
    current = seed
    for m in levels:
        sol = solve_critical(H, current.resized(m), tol=tol)
        out.append(sol)
        if sol is None:
            break
        current = sol.loop
    return out


def observed_orders(lams, noise: float = 1e-13) -> list[float]:
    """log2 ratios of successive inter-level changes above the noise floor."""
    diffs = [abs(b - a) for a, b in zip(lams, lams[1:])]
    return [math.log2(d0 / d1) for d0, d1 in zip(diffs, diffs[1:]) if d1 > noise]
