import math

import numpy as np
import pytest

from cfnl.conformal import conformal_hessian
from cfnl.errors import ConeViolation, DegenerateClosure, DomainError, EstimationError
from cfnl.fields import BubbleField, JetSample
from cfnl.linalg import eigenvalues
from cfnl.radial import (RadialProfile, RadialState, close_u2prime, exact_power, exponent_fit,
                         growth_bound, holder_exponent, holder_seminorm, radial_eigs,
                         radial_vector, shoot, synthetic_xi_profile, xi_diagnostics)


def radial_jet(state, upp, n, direction):
    # 2-jet of u(|y|) at y = r * direction
    e = direction / np.linalg.norm(direction)
    y = state.r * e
    hess = upp * np.outer(e, e) + state.up / state.r * (np.eye(n) - np.outer(e, e))
    return JetSample(y, state.u, state.up * e, hess)


def test_radial_eigs_match_general_tensor():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = 5
        st = RadialState(rng.uniform(0.1, 2), rng.uniform(0.5, 2), rng.uniform(-2, 2))
        upp = rng.uniform(-3, 3)
        l1, l2 = radial_eigs(st, upp, n)
        general = eigenvalues(conformal_hessian(radial_jet(st, upp, n, rng.standard_normal(n))))
        assert np.allclose(np.sort(radial_vector(l1, l2, n)), general, atol=1e-11)


def test_exact_power_amplitudes():
    assert exact_power(4, 1).amplitude == pytest.approx(1.0, abs=1e-15)
    assert exact_power(5, 2).amplitude == pytest.approx(2 ** -0.375, rel=1e-15)
    assert exact_power(5, 2).amplitude == pytest.approx(0.77111, abs=5e-6)
    with pytest.raises(ConeViolation):
        exact_power(5, 3)
    with pytest.raises(ConeViolation):
        exact_power(4, 2)


def test_closure_reproduces_power_second_derivative():
    sol = exact_power(5, 2)
    for r in (0.01, 0.3, 1.0, 7.0):
        a, p = sol.amplitude, sol.exponent
        assert close_u2prime(sol.state(r), 5, 2) == pytest.approx(a * p * (p - 1) * r ** (p - 2), rel=1e-10)


def test_closure_n4_k1():
    for r in (0.05, 0.5, 2.0):
        st = RadialState(r, 1 / r, -1 / r ** 2)
        upp = close_u2prime(st, 4, 1)
        assert upp == pytest.approx(2 / r ** 3, rel=1e-12)
        l1, l2 = radial_eigs(st, upp, 4)
        assert l1 + 3 * l2 == pytest.approx(1.0, rel=1e-12)


def test_degenerate_closure():
    for k in (2, 3):
        with pytest.raises(DegenerateClosure):
            close_u2prime(RadialState(1.0, 1.0, 0.0), 7, k)
    assert math.isfinite(close_u2prime(RadialState(1.0, 1.0, 0.0), 7, 1))


@pytest.mark.parametrize("n,k", [(5, 2), (4, 1)])
def test_shoot_exact_solution(n, k):
    sol = exact_power(n, k)
    prof = shoot(sol.state(1.0), 0.01, 8192, n, k)
    assert prof.completed and len(prof) == 8193
    assert np.max(np.abs(prof.u / sol.u(prof.r) - 1)) < 1e-6
    assert exponent_fit(prof) == pytest.approx(-(n - 2) / 2, abs=1e-6)
    assert np.max(np.abs(prof.operator_values() - 1)) < 1e-10


def test_shoot_is_reversible():
    sol = exact_power(5, 2)
    down = shoot(sol.state(1.0), 0.1, 4096, 5, 2)
    end = RadialState(down.r[-1], down.u[-1], down.up[-1])
    up = shoot(end, 1.0, 4096, 5, 2)
    assert up.u[-1] == pytest.approx(down.u[0], rel=1e-12)
    assert up.up[-1] == pytest.approx(down.up[0], rel=1e-12)


def test_shoot_from_flat_data_stays_superharmonic():
    prof = shoot(RadialState(1.0, 1.0, 0.0), 0.01, 4096, 5, 1)
    assert prof.flag == "u_vanishes"  # inward data hits u = 0 near r = 0.42
    assert np.all(prof.u > 0)
    assert np.all(prof.laplacian <= 0)


def test_perturbed_profiles_respect_growth_bound():
    sol = exact_power(5, 2)
    base = sol.state(1.0)
    for eps in (0.01, -0.01, 0.05, -0.05):
        prof = shoot(RadialState(1.0, base.u, base.up * (1 + eps)), 1e-3, 12288, 5, 2)
        assert prof.completed
        assert -exponent_fit(prof) <= 1.5 + 0.02
        assert growth_bound(prof).stabilized
        assert np.all(prof.laplacian < 0)


def test_perturbed_exponent_regression():
    # pinned first-run values for +1% in u'
    sol = exact_power(5, 2)
    base = sol.state(1.0)
    prof = shoot(RadialState(1.0, base.u, base.up * 1.01), 0.01, 8192, 5, 2)
    assert -exponent_fit(prof) == pytest.approx(1.4943, abs=2e-3)


def test_shoot_stops_at_cone_exit():
    prof = shoot(RadialState(1.0, 1.0, -0.5), 1e-3, 4096, 3, 3)
    assert prof.flag == "cone_violation"
    assert prof.r.min() > 1e-3
    with pytest.raises(DomainError):
        shoot(RadialState(1.0, 1.0, -0.5), 1e-3, 10, 3, 3)


def test_k_equals_n_profile_is_lipschitz():
    c = 2 ** 0.25  # scales the unit bubble (A = 2I) to F_3 = 1
    j = BubbleField(3).jet([1.0, 0.0, 0.0])
    prof = shoot(RadialState(1.0, c * j.u, c * j.grad[0]), 1e-3, 8192, 3, 3)
    assert prof.completed
    d = xi_diagnostics(prof, 1.0)
    assert math.isfinite(d.lipschitz_seminorm) and d.lipschitz_seminorm < 2
    assert d.convexity_min > 0


def test_exponent_fit_edge_cases():
    r = np.geomspace(1e-3, 1, 50)
    const = RadialProfile(r, np.ones_like(r), np.zeros_like(r), np.zeros_like(r), 5, 2)
    assert exponent_fit(const) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(EstimationError):
        exponent_fit(const, (0.5, 0.6))


def test_profile_csv_round_trip(tmp_path):
    sol = exact_power(5, 2)
    prof = shoot(sol.state(1.0), 0.1, 500, 5, 2)
    path = tmp_path / "p.csv"
    prof.to_csv(path)
    back = RadialProfile.from_csv(path, 5, 2)
    assert np.array_equal(back.r, prof.r) and np.array_equal(back.u, prof.u)
    assert np.allclose(back.upp, prof.upp, rtol=1e-10)
    assert open(path).readline().strip() == "r,u,up,lambda1,lambda2"


def test_profile_is_read_only():
    prof = exact_power(4, 1).profile(np.geomspace(0.1, 1, 20))
    with pytest.raises(ValueError):
        prof.u[0] = 2.0


def test_xi_diagnostics_constant_profile():
    r = np.geomspace(1e-3, 1, 100)
    d = xi_diagnostics(RadialProfile(r, np.full_like(r, 2.0), 0 * r, 0 * r, 3, 2), 0.5)
    assert d.holder_seminorm == 0 and d.lipschitz_seminorm == 0
    assert d.convexity_min == pytest.approx(0.0, abs=1e-12)


def test_synthetic_holder_profile():
    alpha = holder_exponent(3, 2)
    assert alpha == pytest.approx(0.5)
    r = np.geomspace(1e-4, 1, 2000)
    prof = synthetic_xi_profile(3, 2, alpha, r, c=1.5)
    xi = prof.u ** -2.0
    assert np.allclose(xi, 1.5 * r ** alpha)
    lips = [holder_seminorm(prof, 1.0, (lo, 1)) for lo in (1e-2, 1e-3, 1e-4)]
    assert lips[0] < lips[1] < lips[2]  # Lipschitz seminorm diverges toward 0
    assert holder_seminorm(prof, alpha) < 2.0


def test_holder_exponent_range():
    assert holder_exponent(3, 3) == 1.0
    with pytest.raises(DomainError):
        holder_exponent(4, 2)
