import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import complex_gradient, random_sphere_point
from weightedproj.core import circle_action, moment_map
from weightedproj.hamiltonians import (
    InvariantMonomial,
    InvarianceError,
    constant_term,
    degree_report,
    from_spec,
    hamiltonian_bound,
    lift,
    load_spec,
    quadratic,
    zero,
)


def quartic_example(q=(1, 2, 1), eps=0.3):
    """Mixed-degree invariant Hamiltonian with time dependence; weights (1, 2, 1)."""
    terms = [
        InvariantMonomial((1, 0, 0), (1, 0, 0), (("cos", 0, 0.7),)),
        InvariantMonomial((0, 1, 0), (0, 1, 0), (("cos", 0, -0.4), ("sin", 1, 0.2))),
        InvariantMonomial((2, 0, 0), (0, 1, 0), (("cos", 1, eps),)),  # z1^2 conj(z2): 2*1 - 2 = 0
        InvariantMonomial((1, 0, 1), (0, 1, 0), (("sin", 2, eps),)),  # z1 z3 conj(z2)
        InvariantMonomial((1, 0, 1), (1, 0, 1), (("cos", 0, eps),)),  # |z1 z3|^2
        InvariantMonomial((1, 0, 0), (0, 0, 1), (("cos", 0, 0.5),)),  # Re(z1 conj z3)
    ]
    return lift(terms, q)


def test_quadratic_is_identity_lift():
    rng = np.random.default_rng(0)
    H = quadratic([0.3, -1.2, 2.0], (2, 1, 3))
    for _ in range(10):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert H.evaluate(z) == pytest.approx(0.3 * abs(z[0]) ** 2 - 1.2 * abs(z[1]) ** 2 + 2 * abs(z[2]) ** 2)
        assert np.allclose(H.gradient(z), 2 * np.array([0.3, -1.2, 2.0]) * z)


def test_constant_lifts_to_moment_map():
    q = (2, 3)
    H = lift([constant_term(2, 1.5)], q)
    z = np.array([0.4 + 0.1j, -0.7j])
    assert H.evaluate(z) == pytest.approx(3.0 * moment_map(z, q))
    assert np.allclose(H.gradient(z), 3.0 * np.array(q) * z)


def test_evaluate_example():
    H = quadratic([1, 2], (1, 1))
    for t in (0.0, 0.37, 5.0):
        assert H.evaluate(np.array([1.0, 0.0]), t) == pytest.approx(1.0)


def test_invariance_violation_names_term():
    with pytest.raises(InvarianceError, match=r"\[1, 0\]"):
        lift([InvariantMonomial((1, 0), (0, 1))], (2, 3))


def test_spec_roundtrip(tmp_path):
    H = quartic_example()
    spec = H.to_spec()
    path = tmp_path / "h.json"
    path.write_text(json.dumps(spec))
    H2 = load_spec(path)
    z = random_sphere_point(np.random.default_rng(1), H.q.q)
    assert H2.evaluate(z, 0.3) == pytest.approx(H.evaluate(z, 0.3))
    assert all(r["invariant"] for r in degree_report(spec))


def test_degree_report_flags_bad_term():
    spec = {"weights": [2, 3], "terms": [{"alpha": [1, 0], "beta": [0, 1]}, {"alpha": [3, 0], "beta": [0, 2]}]}
    assert [r["invariant"] for r in degree_report(spec)] == [False, True]
    with pytest.raises(InvarianceError):
        from_spec(spec)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_homogeneity_invariance_euler(seed):
    rng = np.random.default_rng(seed)
    H = quartic_example()
    q = H.q.q
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    t = rng.uniform()
    s = rng.uniform(0, 2 * math.pi)
    r = rng.uniform(0.2, 5.0)
    val = H.evaluate(z, t)
    assert abs(H.evaluate(circle_action(s, z, q), t) - val) <= 1e-10 * (1 + abs(val))
    assert H.evaluate(r * z, t) == pytest.approx(r**2 * val, rel=1e-10, abs=1e-12)
    g = H.gradient(z, t)
    assert np.real(np.vdot(z, g)) == pytest.approx(2 * val, rel=1e-8, abs=1e-10)
    xk = 1j * np.array(q) * z
    assert abs(np.real(np.vdot(g, xk))) <= 1e-8 * (1 + np.linalg.norm(g) * np.linalg.norm(xk))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    H = quartic_example()
    for _ in range(100):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        t = rng.uniform()
        g = H.gradient(z, t)
        fd = complex_gradient(lambda w: H.evaluate(w, t), z)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_on_sphere_lift_equals_polynomial():
    H = quartic_example()
    z = random_sphere_point(np.random.default_rng(4), H.q.q)
    t = 0.2
    direct = sum(float(term.time_factor(t)) * np.real(term.monomial(z)) for term in H.terms)
    assert H.evaluate(z, t) == pytest.approx(direct, rel=1e-12)


def test_cutoff_leaves_sphere_alone():
    H = quartic_example()
    Hc = lift(H.terms, H.q, cutoff=True)
    z = random_sphere_point(np.random.default_rng(5), H.q.q)
    assert Hc.evaluate(z, 0.1) == pytest.approx(H.evaluate(z, 0.1))
    assert Hc.evaluate(3 * z, 0.1) == pytest.approx(0.0, abs=1e-12)


def test_bound_examples():
    assert hamiltonian_bound(zero((1, 2))) == 0.0
    assert hamiltonian_bound(quadratic([1.0, 2.0], (1, 1)), inflation=0) == pytest.approx(4.0, rel=1e-8)
    H = lift([InvariantMonomial((1, 0), (1, 0), (("sin", 1, 1.0),))], (1, 1))
    # h ranges over [-1, 1]; after the shift to h >= 0, M = 2 * 2
    assert hamiltonian_bound(H, inflation=0) == pytest.approx(4.0, rel=1e-6)


def test_bound_dominates_samples():
    H = quartic_example()
    M = hamiltonian_bound(H)
    rng = np.random.default_rng(9)
    pts = np.array([random_sphere_point(rng, H.q.q) for _ in range(500)])
    vals = np.concatenate([H.evaluate(pts, t) for t in np.linspace(0, 1, 9)])
    assert 2 * (vals.max() - min(vals.min(), 0)) <= M
