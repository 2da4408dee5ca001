"""Closed-form test fields with exact first and second derivatives.

Every field exposes ``value(y)`` (vectorised over a trailing axis of
length n) and ``jet(y)`` returning the exact 2-jet at a single point.
Fields compose with ``+`` and ``*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, SingularityError

# exclusion radius around field and map singularities
DELTA_SING = 1e-6


@dataclass(frozen=True)
class JetSample:
    """Value, gradient and Hessian of a scalar field at ``point``."""

    point: np.ndarray
    u: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        point = np.asarray(self.point, dtype=float)
        grad = np.asarray(self.grad, dtype=float)
        hess = np.asarray(self.hess, dtype=float)
        n = point.shape[0]
        if grad.shape != (n,) or hess.shape != (n, n):
            raise DimensionError(
                f"inconsistent jet shapes: point {point.shape}, grad {grad.shape}, hess {hess.shape}")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", 0.5 * (hess + hess.T))

    @property
    def n(self) -> int:
        return self.point.shape[0]


def _point(y, n):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != n:
        raise DimensionError(f"expected points in R^{n}, got trailing size {y.shape[-1]}")
    return y


class AnalyticField:
    """Base class; subclasses implement ``value`` and ``_jet``."""

    n: int

    def value(self, y):
        raise NotImplementedError

    def _jet(self, y: np.ndarray):
        raise NotImplementedError

    def jet(self, y) -> JetSample:
        y = _point(y, self.n)
        if y.ndim != 1:
            raise DimensionError("jet() takes a single point")
        u, g, h = self._jet(y)
        return JetSample(y, u, g, h)

    def __call__(self, y):
        return self.value(y)

    def __add__(self, other):
        return SumField((self, other))

    def __mul__(self, other):
        return ProductField(self, other)


@dataclass(frozen=True)
class PowerField(AnalyticField):
    """u(y) = offset + amplitude * |y - center|^exponent."""

    n: int
    exponent: float
    amplitude: float = 1.0
    offset: float = 0.0
    center: tuple = None

    def __post_init__(self):
        c = np.zeros(self.n) if self.center is None else np.asarray(self.center, dtype=float)
        if c.shape != (self.n,):
            raise DimensionError("center has the wrong dimension")
        object.__setattr__(self, "center", tuple(c))

    @property
    def _c(self):
        return np.asarray(self.center)

    def value(self, y):
        y = _point(y, self.n)
        rho = np.linalg.norm(y - self._c, axis=-1)
        with np.errstate(divide="ignore"):
            return self.offset + self.amplitude * rho ** self.exponent

    def _jet(self, y):
        z = y - self._c
        rho = np.linalg.norm(z)
        if rho < DELTA_SING:
            raise SingularityError(f"power field evaluated within {DELTA_SING} of its center")
        p, c = self.exponent, self.amplitude
        zh = z / rho
        u = self.offset + c * rho ** p
        g = c * p * rho ** (p - 1) * zh
        h = c * p * rho ** (p - 2) * (np.eye(self.n) + (p - 2) * np.outer(zh, zh))
        return u, g, h


@dataclass(frozen=True)
class BubbleField(AnalyticField):
    """u(y) = (a / (1 + a^2 |y - center|^2))^((n-2)/2); A^u = 2 I."""

    n: int
    a: float = 1.0
    center: tuple = None

    def __post_init__(self):
        if self.n < 3:
            raise DimensionError("bubble needs n >= 3")
        if self.a <= 0:
            raise DomainError("bubble scale a must be positive")
        c = np.zeros(self.n) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", tuple(c))

    def value(self, y):
        y = _point(y, self.n)
        z = y - np.asarray(self.center)
        s = 1.0 + self.a ** 2 * np.sum(z * z, axis=-1)
        return (self.a / s) ** ((self.n - 2) / 2)

    def _jet(self, y):
        m = (self.n - 2) / 2
        a = self.a
        z = y - np.asarray(self.center)
        s = 1.0 + a * a * (z @ z)
        am = a ** m
        u = am * s ** (-m)
        g = -2.0 * m * a * a * am * s ** (-m - 1) * z
        h = (-2.0 * m * a * a * am * s ** (-m - 1) * np.eye(self.n)
             + 4.0 * m * (m + 1) * a ** 4 * am * s ** (-m - 2) * np.outer(z, z))
        return u, g, h


@dataclass(frozen=True)
class AffineField(AnalyticField):
    """u(y) = a + p . y."""

    n: int
    a: float = 0.0
    p: tuple = None

    def __post_init__(self):
        p = np.zeros(self.n) if self.p is None else np.asarray(self.p, dtype=float)
        if p.shape != (self.n,):
            raise DimensionError("slope has the wrong dimension")
        object.__setattr__(self, "p", tuple(p))

    def value(self, y):
        y = _point(y, self.n)
        return self.a + y @ np.asarray(self.p)

    def _jet(self, y):
        return self.a + y @ np.asarray(self.p), np.asarray(self.p), np.zeros((self.n, self.n))


@dataclass(frozen=True)
class SumField(AnalyticField):
    terms: tuple
    n: int = field(init=False)

    def __post_init__(self):
        dims = {t.n for t in self.terms}
        if len(dims) != 1:
            raise DimensionError("summands live in different dimensions")
        object.__setattr__(self, "n", dims.pop())

    def value(self, y):
        return sum(t.value(y) for t in self.terms)

    def _jet(self, y):
        parts = [t._jet(y) for t in self.terms]
        return (sum(p[0] for p in parts), sum(p[1] for p in parts), sum(p[2] for p in parts))


@dataclass(frozen=True)
class ProductField(AnalyticField):
    left: AnalyticField
    right: AnalyticField
    n: int = field(init=False)

    def __post_init__(self):
        if self.left.n != self.right.n:
            raise DimensionError("factors live in different dimensions")
        object.__setattr__(self, "n", self.left.n)

    def value(self, y):
        return self.left.value(y) * self.right.value(y)

    def _jet(self, y):
        f, fg, fh = self.left._jet(y)
        g, gg, gh = self.right._jet(y)
        return f * g, f * gg + g * fg, f * gh + g * fh + np.outer(fg, gg) + np.outer(gg, fg)


def fundamental_solution(n: int, amplitude: float = 1.0) -> PowerField:
    """amplitude * |y|^(2-n)."""
    return PowerField(n, 2.0 - n, amplitude)


def singular_power(n: int, amplitude: float = 1.0) -> PowerField:
    """amplitude * |y|^(-(n-2)/2), the field with lambda(A^u) = (-1/2, 1/2, ...) at amplitude 1."""
    return PowerField(n, -(n - 2) / 2, amplitude)


def linear_perturbed(n: int, coeff: float = 0.5, amplitude: float = 1.0) -> ProductField:
    """|y|^(-(n-2)/2) (1 + coeff * y_1); not a solution, used as a control."""
    p = np.zeros(n)
    p[0] = coeff
    return ProductField(singular_power(n, amplitude), AffineField(n, 1.0, tuple(p)))
