"""The conformal Hessian A^u, Moebius/dilation pull-backs and invariance checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConeViolation, DimensionError, DomainError, PositivityError, SingularityError
from .fields import DELTA_SING, AnalyticField, JetSample
from .linalg import eigenvalues
from .symfunc import f_k

__all__ = [
    "conformal_hessian", "eigenvalues", "MobiusMap", "mobius_image", "transform_jet",
    "TransformedField", "invariance_residual", "operator_value",
]

INVERSION = "inversion-sphere"
DILATION = "dilation-translation"


def conformal_hessian(jet: JetSample) -> np.ndarray:
    """A^u at the jet's point.

    A^u = -2/(n-2) u^(-(n+2)/(n-2)) D^2u + 2n/(n-2)^2 u^(-2n/(n-2)) Du (x) Du
          - 2/(n-2)^2 u^(-2n/(n-2)) |Du|^2 I
    """
    n = jet.n
    if n < 3:
        raise DimensionError(f"A^u is defined for n >= 3, got n={n}")
    if not jet.u > 0:
        raise PositivityError(f"A^u needs u > 0, got u={jet.u}")
    u, g, h = jet.u, jet.grad, jet.hess
    c1 = -2.0 / (n - 2) * u ** (-(n + 2) / (n - 2))
    c2 = u ** (-2.0 * n / (n - 2)) / (n - 2) ** 2
    a = c1 * h + 2.0 * n * c2 * np.outer(g, g) - 2.0 * c2 * (g @ g) * np.eye(n)
    return 0.5 * (a + a.T)


def operator_value(jet: JetSample, k: int) -> float:
    """F_k(A^u) at the jet; raises ConeViolation carrying the point."""
    lam = eigenvalues(conformal_hessian(jet))
    try:
        return f_k(lam, k)
    except ConeViolation as exc:
        raise ConeViolation(str(exc), index=exc.index, point=jet.point) from None


@dataclass(frozen=True)
class MobiusMap:
    """Sphere inversion y -> x + lam^2 (y-x)/|y-x|^2 or dilation y -> x + lam y.

    The associated field transforms are
    u_{x,lam}(y) = (lam/|y-x|)^(n-2) u(image(y))   (inversion) and
    v^{x,lam}(y) = lam^((n-2)/2) v(image(y))       (dilation).
    """

    x: tuple
    lam: float
    kind: str = INVERSION

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.ravel(self.x)))
        if not self.lam > 0:
            raise DomainError(f"radius parameter must be positive, got {self.lam}")
        if self.kind not in (INVERSION, DILATION):
            raise DomainError(f"unknown map kind {self.kind!r}")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.x)

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.n:
            raise DimensionError("point dimension does not match the map")
        if self.kind == INVERSION and np.any(np.linalg.norm(y - self.center, axis=-1) < DELTA_SING):
            raise SingularityError("inversion evaluated at its center")
        return y

    def image(self, y) -> np.ndarray:
        y = self._check(y)
        if self.kind == DILATION:
            return self.center + self.lam * y
        z = y - self.center
        r2 = np.sum(z * z, axis=-1, keepdims=True)
        return self.center + self.lam ** 2 * z / r2

    def weight(self, y) -> np.ndarray:
        y = self._check(y)
        n = self.n
        if self.kind == DILATION:
            return np.full(y.shape[:-1], self.lam ** ((n - 2) / 2))
        rho = np.linalg.norm(y - self.center, axis=-1)
        return (self.lam / rho) ** (n - 2)


def mobius_image(map: MobiusMap, y) -> np.ndarray:
    return map.image(y)


def transform_jet(field: AnalyticField, map: MobiusMap, y) -> JetSample:
    """Exact 2-jet of the transformed field at y, by the chain rule."""
    y = map._check(np.asarray(y, dtype=float))
    n = map.n
    if field.n != n:
        raise DimensionError("field and map dimensions differ")
    img = map.image(y)
    u, g, h = field._jet(img)
    lam = map.lam

    if map.kind == DILATION:
        s = lam ** ((n - 2) / 2)
        return JetSample(y, s * u, s * lam * g, s * lam * lam * h)

    z = y - map.center
    r2 = z @ z
    w = (lam * lam / r2) ** ((n - 2) / 2)
    dw = -(n - 2) * w * z / r2
    d2w = (n - 2) * w * (n * np.outer(z, z) / r2 ** 2 - np.eye(n) / r2)

    eye = np.eye(n)
    jac = lam * lam / r2 * (eye - 2.0 * np.outer(z, z) / r2)
    # second derivatives of the inversion: d_b d_c phi^a
    d2phi = lam * lam * (
        -2.0 * (np.einsum("ab,c->abc", eye, z) + np.einsum("ac,b->abc", eye, z)
                + np.einsum("a,bc->abc", z, eye)) / r2 ** 2
        + 8.0 * np.einsum("a,b,c->abc", z, z, z) / r2 ** 3)

    gg = jac.T @ g
    gh = jac.T @ h @ jac + np.einsum("a,abc->bc", g, d2phi)
    return JetSample(
        y,
        w * u,
        u * dw + w * gg,
        u * d2w + np.outer(dw, gg) + np.outer(gg, dw) + w * gh,
    )


@dataclass(frozen=True)
class TransformedField(AnalyticField):
    """The pull-back of ``base`` by ``map`` as a field in its own right."""

    base: AnalyticField
    map: MobiusMap

    @property
    def n(self) -> int:
        return self.base.n

    def value(self, y):
        return self.map.weight(y) * self.base.value(self.map.image(y))

    def _jet(self, y):
        j = transform_jet(self.base, self.map, y)
        return j.u, j.grad, j.hess


def invariance_residual(field: AnalyticField, map: MobiusMap, samples: Iterable, k) -> float:
    """max over samples of |F_k(A^{transformed})(y) - F_k(A^u)(image(y))|.

    Raises
    ------
    ConeViolation
        At the first sample whose eigenvalues leave Gamma_k on either side.
    """
    k = getattr(k, "k", k)
    worst = 0.0
    for y in samples:
        y = np.asarray(y, dtype=float)
        lhs = operator_value(transform_jet(field, map, y), k)
        rhs = operator_value(field.jet(map.image(y)), k)
        worst = max(worst, abs(lhs - rhs))
    return worst
