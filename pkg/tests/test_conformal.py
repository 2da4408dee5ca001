import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfnl.conformal import (DILATION, INVERSION, MobiusMap, TransformedField, conformal_hessian,
                            invariance_residual, mobius_image, operator_value, transform_jet)
from cfnl.errors import ConeViolation, DimensionError, PositivityError, SingularityError
from cfnl.fields import BubbleField, JetSample, PowerField, fundamental_solution, singular_power
from cfnl.linalg import eigenvalues, random_orthogonal
from cfnl.symfunc import f_k, in_gamma_k
from test_fields import fd_jet


def random_jet(rng, n):
    g = rng.standard_normal(n)
    h = rng.standard_normal((n, n))
    return JetSample(rng.standard_normal(n), rng.uniform(0.2, 3.0), g, h + h.T)


def test_constant_field_has_zero_tensor():
    j = JetSample(np.ones(3), 2.5, np.zeros(3), np.zeros((3, 3)))
    assert np.all(conformal_hessian(j) == 0)


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_singular_power_eigenvalues(n):
    rng = np.random.default_rng(n)
    f = singular_power(n)
    expected = np.array([-0.5] + [0.5] * (n - 1))
    for _ in range(20):
        y = rng.standard_normal(n) * rng.uniform(0.05, 3)
        assert np.max(np.abs(eigenvalues(conformal_hessian(f.jet(y))) - expected)) < 1e-10


def test_bubble_is_twice_identity():
    f = BubbleField(4, 1.3, (0.1, 0.0, -0.2, 0.3))
    a = conformal_hessian(f.jet([0.4, -0.2, 0.7, 0.1]))
    assert np.allclose(a, 2 * np.eye(4), atol=1e-12)


@settings(deadline=None)
@given(st.integers(3, 7), st.integers(0, 10_000))
def test_trace_identity(n, seed):
    # tr A^u = -2/(n-2) u^(-(n+2)/(n-2)) lap u: the gradient terms cancel in the trace
    j = random_jet(np.random.default_rng(seed), n)
    tr = np.trace(conformal_hessian(j))
    ref = -2.0 / (n - 2) * j.u ** (-(n + 2) / (n - 2)) * np.trace(j.hess)
    assert abs(tr - ref) <= 1e-12 * max(1.0, abs(ref), np.abs(conformal_hessian(j)).sum())


@settings(deadline=None)
@given(st.integers(3, 7), st.integers(0, 10_000), st.floats(0.1, 10))
def test_scaling_law(n, seed, a):
    j = random_jet(np.random.default_rng(seed), n)
    scaled = JetSample(j.point, a * j.u, a * j.grad, a * j.hess)
    lhs = conformal_hessian(scaled)
    rhs = a ** (-4.0 / (n - 2)) * conformal_hessian(j)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_orthogonal_invariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(3, 7))
        q = random_orthogonal(n, rng)
        j = JetSample(rng.standard_normal(n), 1.0, 0.1 * rng.standard_normal(n), -np.eye(n))
        rot = JetSample(q.T @ j.point, j.u, q.T @ j.grad, q.T @ j.hess @ q)
        lam = eigenvalues(conformal_hessian(j))
        for k in range(1, n + 1):
            if in_gamma_k(lam, k):
                assert abs(operator_value(rot, k) - operator_value(j, k)) < 1e-10


def test_cone_implies_superharmonic():
    rng = np.random.default_rng(9)
    hits = 0
    for _ in range(2000):
        n = int(rng.integers(3, 7))
        j = random_jet(rng, n)
        lam = eigenvalues(conformal_hessian(j))
        if in_gamma_k(lam, 1):
            hits += 1
            assert np.trace(j.hess) < 0
    assert hits > 100


def test_preconditions():
    with pytest.raises(PositivityError):
        conformal_hessian(JetSample(np.ones(3), -1.0, np.zeros(3), np.eye(3)))
    with pytest.raises(DimensionError):
        conformal_hessian(JetSample(np.ones(2), 1.0, np.zeros(2), np.eye(2)))


def test_operator_value_reports_point():
    j = singular_power(5).jet([0.3, 0.1, 0.0, 0.0, 0.2])
    assert operator_value(j, 2) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    with pytest.raises(ConeViolation) as exc:
        operator_value(j, 3)
    assert np.allclose(exc.value.point, j.point)


def test_mobius_image_reference_points():
    m = MobiusMap(np.zeros(4), 1.0)
    y = np.array([0.6, 0.0, 0.8, 0.0])
    assert np.allclose(mobius_image(m, y), y)
    assert np.allclose(mobius_image(m, [2.0, 0, 0, 0]), [0.5, 0, 0, 0])
    with pytest.raises(SingularityError):
        m.image(np.zeros(4))


def test_inversion_is_involution():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = MobiusMap(rng.standard_normal(3), rng.uniform(0.2, 2))
        y = rng.standard_normal(3)
        assert np.allclose(m.image(m.image(y)), y, atol=1e-12, rtol=0)


def test_identity_dilation_keeps_jet():
    f = BubbleField(3, 1.4)
    y = np.array([0.2, 0.5, -0.3])
    t = transform_jet(f, MobiusMap(np.zeros(3), 1.0, DILATION), y)
    j = f.jet(y)
    assert t.u == j.u and np.all(t.grad == j.grad) and np.all(t.hess == j.hess)


def test_kelvin_transform_of_fundamental_solution_is_one():
    for n in (3, 4, 6):
        t = transform_jet(fundamental_solution(n), MobiusMap(np.zeros(n), 1.0), np.full(n, 0.37))
        assert t.u == pytest.approx(1.0, abs=1e-13)
        assert np.allclose(t.grad, 0, atol=1e-12)
        assert np.allclose(t.hess, 0, atol=1e-11)


def test_kelvin_involution():
    rng = np.random.default_rng(4)
    f = PowerField(4, -1.0, 1.0, 0.3, (0.5, 0.1, 0.0, 0.0))
    for _ in range(20):
        m = MobiusMap(rng.standard_normal(4) * 0.3, rng.uniform(0.5, 1.5))
        twice = TransformedField(TransformedField(f, m), m)
        y = rng.uniform(0.4, 1.2, 4) * rng.choice([-1, 1], 4)
        a, b = twice.jet(y), f.jet(y)
        assert abs(a.u - b.u) < 1e-10 * abs(b.u)
        assert np.max(np.abs(a.grad - b.grad)) < 1e-10 * max(1, np.abs(b.grad).max())
        assert np.max(np.abs(a.hess - b.hess)) < 1e-10 * max(1, np.abs(b.hess).max())


def test_transform_jet_against_finite_differences():
    rng = np.random.default_rng(8)
    worst = 0.0
    for trial in range(50):
        n = int(rng.integers(3, 6))
        kind = INVERSION if trial % 3 else DILATION
        m = MobiusMap(0.3 * rng.standard_normal(n), rng.uniform(0.5, 1.5), kind)
        f = BubbleField(n, rng.uniform(0.5, 2.0))
        y = m.center + rng.uniform(0.5, 1.0) * rng.standard_normal(n) / math.sqrt(n) + 0.4
        tf = TransformedField(f, m)
        j = tf.jet(y)
        g, h = fd_jet(tf, y, 1e-4)
        worst = max(worst, np.abs(j.grad - g).max() / np.abs(j.grad).max(),
                    np.abs(j.hess - h).max() / np.abs(j.hess).max())
    assert worst < 1e-5


def test_invariance_residuals():
    rng = np.random.default_rng(12)
    y = rng.uniform(0.3, 0.8, (10, 5))
    power = singular_power(5, 0.7711054127039704)
    assert invariance_residual(power, MobiusMap(np.zeros(5), 1.0, DILATION), y, 2) == 0.0
    assert invariance_residual(power, MobiusMap(np.zeros(5), 1.7, DILATION), y, 2) < 1e-8
    bubble = BubbleField(5, 1.2)
    m = MobiusMap(rng.standard_normal(5) * 0.2, rng.uniform(0.5, 1.5))
    samples = [s for s in annulus(rng, 5, 50) if np.linalg.norm(s - m.center) > 1e-2]
    assert invariance_residual(bubble, m, samples, 1) < 1e-6


def annulus(rng, n, count):
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True) * rng.uniform(0.2, 2, (count, 1))


def test_invariance_residual_raises_outside_cone():
    with pytest.raises(ConeViolation):
        invariance_residual(singular_power(5), MobiusMap(np.ones(5), 1.0), [np.full(5, 0.2)], 3)


def test_f_k_matches_operator_value():
    j = BubbleField(4).jet([0.1, 0.2, 0.3, 0.4])
    assert operator_value(j, 3) == pytest.approx(f_k([2, 2, 2, 2], 3), rel=1e-12)
