import numpy as np
import pytest

from cfnl.errors import DimensionError, SingularityError
from cfnl.fields import (AffineField, BubbleField, PowerField, fundamental_solution,
                         linear_perturbed, singular_power)


def fd_jet(field, y, h=1e-4):
    n = len(y)
    e = np.eye(n) * h
    g = np.array([(field.value(y + e[i]) - field.value(y - e[i])) / (2 * h) for i in range(n)])
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            hess[i, j] = (field.value(y + e[i] + e[j]) - field.value(y + e[i] - e[j])
                          - field.value(y - e[i] + e[j]) + field.value(y - e[i] - e[j])) / (4 * h * h)
    return g, hess


FIELDS = [
    PowerField(3, -0.5),
    PowerField(4, 1.3, 2.0, 0.5, (0.1, -0.2, 0.0, 0.3)),
    BubbleField(5, 1.7, (0.2, 0.0, -0.1, 0.0, 0.1)),
    AffineField(3, 1.0, (0.2, -0.1, 0.4)),
    linear_perturbed(5),
    fundamental_solution(3) + AffineField(3, 1.0, (0.1, 0.1, 0.0)),
    singular_power(4) * BubbleField(4),
]


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: type(f).__name__)
def test_jet_matches_finite_differences(field):
    rng = np.random.default_rng(0)
    for _ in range(5):
        y = rng.uniform(0.3, 0.9, field.n) * rng.choice([-1, 1], field.n)
        jet = field.jet(y)
        assert jet.u == pytest.approx(field.value(y), rel=1e-14)
        g, h = fd_jet(field, y)
        assert np.allclose(jet.grad, g, rtol=1e-6, atol=1e-7)
        assert np.allclose(jet.hess, h, rtol=1e-4, atol=1e-5)


def test_value_is_vectorised():
    f = BubbleField(3)
    pts = np.random.default_rng(1).standard_normal((4, 2, 3))
    vals = f.value(pts)
    assert vals.shape == (4, 2)
    assert vals[2, 1] == pytest.approx(f.value(pts[2, 1]))


def test_singular_point_rejected():
    with pytest.raises(SingularityError):
        singular_power(3).jet(np.zeros(3))


def test_dimension_checks():
    with pytest.raises(DimensionError):
        PowerField(3, 1.0, center=(0.0, 0.0))
    with pytest.raises(DimensionError):
        singular_power(3).jet(np.ones(4))
