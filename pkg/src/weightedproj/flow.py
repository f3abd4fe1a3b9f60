"""Flow of X_{H_t + lam K_q}, the induced time-one map on CP^n(q), fixed points.

The integrator is the explicit Dormand-Prince 8(5,3) scheme.  After every
accepted step the state is scaled back onto S^{2n+1}(q); the drift of
2 K_q measured just before that projection is what ``kq_drift`` reports.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop
from scipy.stats import qmc

from .core import (
    DomainError,
    TOL_ORBIT,
    as_weights,
    circle_action,
    coordinate_point,
    moment_map,
    normalize_to_sphere,
    on_sphere,
    orbit_distance,
)
from .hamiltonians import LiftedHamiltonian

TOL_CONSERVE = 1e-9
TOL_FIX = 1e-7
TOL_CLASS = 1e-6

# Dormand-Prince 8(5,3) tableau
_NS = _dop.N_STAGES
_A = _dop.A[:_NS, :_NS]
_B = _dop.B
_C = _dop.C[:_NS]
_E3 = _dop.E3
_E5 = _dop.E5


class IntegrationError(RuntimeError):
    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


@dataclass
class FlowResult:
    trajectory: list[tuple[float, np.ndarray]]
    endpoint: np.ndarray
    kq_drift: float
    h_drift: float | None
    steps: int
    conservative: bool = True


def _rhs(H: LiftedHamiltonian, lam: float):
    qa = H.q.array

    def f(t, z):
        return 1j * (H.gradient(z, t) + lam * qa * z)

    return f


def integrate(
    H: LiftedHamiltonian,
    lam: float,
    z0,
    t_span=(0.0, 1.0),
    rtol: float = 1e-12,
    atol: float = 1e-13,
    project: bool = True,
    keep_trajectory: bool = False,
    max_steps: int = 200_000,
    tol_conserve: float = TOL_CONSERVE,
) -> FlowResult:
    """Solve ``z' = i grad H_t(z) + i lam q z`` from a point on the weighted sphere."""
    q = H.q
    z = np.asarray(z0, dtype=complex).copy()
    on = on_sphere(z, q)
    if project and not on:
        raise DomainError("initial point is not on S^{2n+1}(q); normalize it first")
    f = _rhs(H, lam)
    t, t_end = float(t_span[0]), float(t_span[1])
    span = t_end - t
    h = span / 64 if span else 0.0
    h_min = abs(span) * 1e-14
    traj = [(t, z.copy())] if keep_trajectory else []
    drift = 0.0
    h0 = H.evaluate(z, t) if H.autonomous else None
    h_drift = 0.0 if H.autonomous else None
    steps = 0
    K = np.empty((_NS + 1, q.dim), dtype=complex)
    K[0] = f(t, z)
    while (t_end - t) * np.sign(span) > 0:
        if steps >= max_steps:
            raise IntegrationError("too many steps", t, z)
        if abs(h) < h_min:
            raise IntegrationError(f"step size underflow at t={t}", t, z)
        if (t + h - t_end) * np.sign(span) > 0:
            h = t_end - t
        for i in range(1, _NS):
            K[i] = f(t + _C[i] * h, z + h * (_A[i, :i] @ K[:i]))
        z8 = z + h * (_B @ K[:_NS])
        K[_NS] = f(t + h, z8)
        scale = atol + rtol * np.maximum(np.abs(z), np.abs(z8))
        e5 = np.linalg.norm((_E5 @ K) / scale) ** 2
        e3 = np.linalg.norm((_E3 @ K) / scale) ** 2
        err = 0.0 if e5 == 0 and e3 == 0 else abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * q.dim)
        if err <= 1.0:
            t += h
            steps += 1
            if project:
                rho = 2.0 * float(moment_map(z8, q))
                drift = max(drift, abs(rho - 1.0))
                z8 = z8 / math.sqrt(rho)
                K[0] = f(t, z8)
            else:
                K[0] = K[_NS]
            z = z8
            if h0 is not None:
                h_drift = max(h_drift, abs(H.evaluate(z, t) - h0))
            if keep_trajectory:
                traj.append((t, z.copy()))
        fac = 0.9 * err ** (-1 / 8) if err > 0 else 10.0
        h *= min(10.0, max(0.2, fac))
    if not keep_trajectory:
        traj = [(float(t_span[0]), np.asarray(z0, dtype=complex)), (t, z.copy())]
    conservative = drift <= tol_conserve if on else False
    return FlowResult(traj, z, drift, h_drift, steps, conservative)


def time_one_map(H: LiftedHamiltonian, p, **kwargs) -> np.ndarray:
    """Endpoint of the lifted flow with lam = 0; descends to phi_1 on CP^n(q)."""
    return integrate(H, 0.0, p, **kwargs).endpoint


def quadratic_flow(a, q, lam: float, z0, t: float = 1.0) -> np.ndarray:
    """Closed form for ``H = sum a_j |z_j|^2``: ``z_j(t) = e^{i t (2 a_j + lam q_j)} z_j(0)``."""
    q = as_weights(q)
    a = np.asarray(a, dtype=float)
    return np.exp(1j * t * (2 * a + lam * q.array)) * np.asarray(z0, dtype=complex)


@dataclass
class FixedPointRecord:
    rep: np.ndarray
    lam: float
    lambda_class: float
    residual: float
    iterations: int = 0
    seed_index: int | None = field(default=None, compare=False)

    def as_dict(self) -> dict:
        return {
            "rep": [[float(z.real), float(z.imag)] for z in self.rep],
            "lambda": self.lam,
            "lambda_class": self.lambda_class,
            "residual": self.residual,
            "iterations": self.iterations,
            "seed_index": self.seed_index,
        }


def _class(lam: float, modulus: float = 2 * math.pi) -> float:
    c = math.fmod(lam, modulus)
    if c < 0:
        c += modulus
    if c >= modulus - 1e-12:
        c = 0.0
    return c


def class_distance(a: float, b: float, modulus: float = 2 * math.pi) -> float:
    d = abs(a - b) % modulus
    return min(d, modulus - d)


def _closing_angles(a_j: float, q_j: int) -> np.ndarray:
    """All s in [0, 2 pi) with e^{i(2 a_j + q_j s)} = 1."""
    base = ((-2.0 * a_j) % (2 * math.pi)) / q_j
    return np.array([base + 2 * math.pi * m / q_j for m in range(q_j)])


def resonant_pairs(a, q, tol: float = 1e-8) -> list[tuple[int, int]]:
    """Index pairs (0-based) for which [e^{2ia} z] = [z] has a common multiplier."""
    q = as_weights(q)
    angles = [_closing_angles(aj, qj) for aj, qj in zip(a, q.q)]
    bad = []
    for i in range(q.dim):
        for j in range(i + 1, q.dim):
            diff = np.abs(np.subtract.outer(angles[i], angles[j])) % (2 * math.pi)
            if np.min(np.minimum(diff, 2 * math.pi - diff)) <= tol:
                bad.append((i, j))
    return bad


def quadratic_fixed_points(a, q) -> list[FixedPointRecord]:
    """Fixed points of the time-one map of ``sum a_j |z_j|^2``: the n+1 coordinate points."""
    q = as_weights(q)
    a = [float(x) for x in a]
    bad = resonant_pairs(a, q)
    if bad:
        raise DomainError(f"non-generic coefficients: resonant index pairs {bad}")
    records = []
    for j in range(q.dim):
        rep = coordinate_point(j, q)
        lam = float(_closing_angles(a[j], q.q[j])[0])
        end = quadratic_flow(a, q, 0.0, rep)
        residual = float(np.linalg.norm(circle_action(lam, end, q) - rep))
        records.append(FixedPointRecord(rep, lam, _class(lam), residual, 0, j))
    return records


def _fixed_point_residual(H, p, lam, p_ref, g_ref, end=None):
    if end is None:
        end = time_one_map(H, p, project=False)
    gap = circle_action(lam, end, H.q) - p
    return np.concatenate(
        [gap.real, gap.imag, [2.0 * moment_map(p, H.q) - 1.0, np.real(np.vdot(g_ref, p - p_ref))]]
    ), end


def detect_fixed_point(
    H: LiftedHamiltonian,
    seed,
    tol_fix: float = TOL_FIX,
    max_iter: int = 50,
    fd_step: float = 1e-6,
) -> FixedPointRecord | None:
    """Look for a fixed point of phi_1 on CP^n(q) near ``seed``.

    If the seed's orbit is already mapped to itself, the record is returned
    directly.  Otherwise a Gauss-Newton iteration in (p, lam) is run on
    ``A_lam phi(p) = p`` with p on the sphere and a phase slice through the
    seed; the Jacobian in p is by central differences, the one in lam is exact.
    """
    q = H.q
    _, p = normalize_to_sphere(seed, q)
    end = time_one_map(H, p)
    d, s = orbit_distance(end, p, q)
    if d <= tol_fix:
        return FixedPointRecord(p, s, _class(s), d, 0)

    dim = q.dim
    p_ref = p.copy()
    g_ref = 1j * q.array * p_ref
    lam = s
    r, end = _fixed_point_residual(H, p, lam, p_ref, g_ref)
    it = 0
    for it in range(1, max_iter + 1):
        J = np.empty((2 * dim + 2, 2 * dim + 1))
        for c in range(2 * dim):
            e = np.zeros(dim, dtype=complex)
            e[c % dim] = fd_step if c < dim else 1j * fd_step
            rp, _ = _fixed_point_residual(H, p + e, lam, p_ref, g_ref)
            rm, _ = _fixed_point_residual(H, p - e, lam, p_ref, g_ref)
            J[:, c] = (rp - rm) / (2 * fd_step)
        dl = 1j * q.array * circle_action(lam, end, q)
        J[:, -1] = np.concatenate([dl.real, dl.imag, [0.0, 0.0]])
        delta = np.linalg.lstsq(J, -r, rcond=1e-10)[0]
        norm0 = np.linalg.norm(r)
        step = 1.0
        for _ in range(8):
            p_new = p + step * (delta[:dim] + 1j * delta[dim : 2 * dim])
            lam_new = lam + step * delta[-1]
            r_new, end_new = _fixed_point_residual(H, p_new, lam_new, p_ref, g_ref)
            if np.linalg.norm(r_new) < norm0:
                break
            step /= 2
        else:
            break
        p, lam, r, end = p_new, lam_new, r_new, end_new
        if np.linalg.norm(r) <= 1e-12 or np.linalg.norm(step * delta) <= 1e-14:
            break
    _, p = normalize_to_sphere(p, q)
    end = time_one_map(H, p)
    d, s = orbit_distance(end, p, q)
    if d <= tol_fix:
        return FixedPointRecord(p, s, _class(s), d, it)
    return None


def sphere_seeds(q, count: int) -> list[np.ndarray]:
    """Coordinate points followed by a deterministic Halton sample of the sphere."""
    q = as_weights(q)
    seeds = [coordinate_point(j, q) for j in range(q.dim)]
    extra = count - len(seeds)
    if extra > 0:
        u = qmc.Halton(d=2 * q.dim, scramble=False).random(extra + 1)[1:]
        x = 2.0 * u - 1.0
        for row in x:
            z = row[: q.dim] + 1j * row[q.dim :]
            seeds.append(normalize_to_sphere(z, q)[1])
    return seeds[:count]


def merge_records(records, q, tol_orbit: float = 10 * TOL_FIX, tol_class: float = TOL_CLASS) -> list[FixedPointRecord]:
    """Drop records describing the same fixed point; deterministic order."""
    q = as_weights(q)
    kept: list[FixedPointRecord] = []
    for rec in records:
        if rec is None:
            continue
        if any(
            class_distance(rec.lambda_class, k.lambda_class) <= tol_class
            and orbit_distance(rec.rep, k.rep, q)[0] <= tol_orbit
            for k in kept
        ):
            continue
        kept.append(rec)
    kept.sort(key=lambda r: (round(r.lambda_class, 9), tuple(np.round(np.abs(r.rep), 9))))
    return kept


def _detect_indexed(args):
    H, seed, index, tol_fix, max_iter = args
    rec = detect_fixed_point(H, seed, tol_fix=tol_fix, max_iter=max_iter)
    if rec is not None:
        rec.seed_index = index
    return rec


def find_fixed_points(
    H: LiftedHamiltonian,
    n_seeds: int | None = None,
    tol_fix: float = TOL_FIX,
    max_iter: int = 50,
    workers: int = 1,
) -> list[FixedPointRecord]:
    """Run detection from coordinate points plus a Halton sample; default 4(n+1) seeds."""
    if n_seeds is None:
        n_seeds = 4 * H.q.dim
    seeds = sphere_seeds(H.q, n_seeds)
    jobs = [(H, s, i, tol_fix, max_iter) for i, s in enumerate(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(_detect_indexed, jobs))
    else:
        found = [_detect_indexed(job) for job in jobs]
    return merge_records(found, H.q)


def distinct_classes(records, tol: float = TOL_CLASS, modulus: float = 2 * math.pi) -> list[float]:
    classes: list[float] = []
    for c in sorted(r.lambda_class for r in records):
        if not any(class_distance(c, k, modulus) <= tol for k in classes):
            classes.append(c)
    return classes


def min_class_separation(records, modulus: float = 2 * math.pi) -> float:
    cls = [r.lambda_class for r in records]
    return min(
        (class_distance(a, b, modulus) for i, a in enumerate(cls) for b in cls[i + 1 :]),
        default=math.inf,
    )


__all__ = [
    "FixedPointRecord",
    "FlowResult",
    "IntegrationError",
    "TOL_ORBIT",
    "detect_fixed_point",
    "distinct_classes",
    "find_fixed_points",
    "integrate",
    "merge_records",
    "quadratic_fixed_points",
    "quadratic_flow",
    "resonant_pairs",
    "sphere_seeds",
    "time_one_map",
]
