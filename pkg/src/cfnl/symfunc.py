"""Elementary symmetric functions, Garding cones and the operators F_k.

All functions accept any sequence of numbers (floats, ints, ``Fraction``)
and keep the arithmetic type of their input, so integer or rational input
gives exact results.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ConeViolation, DomainError, InternalConsistencyError

# Subset enumeration is used up to this size, the product recurrence above.
ENUMERATION_MAX_N = 12


@dataclass(frozen=True)
class ConeSpec:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")


def _as_list(lam) -> list:
    vals = [v.item() if hasattr(v, "item") else v for v in lam]
    if not vals:
        raise DomainError("empty eigenvalue vector")
    return vals


def _check_k(k: int, n: int, allow_zero: bool = False) -> None:
    lo = 0 if allow_zero else 1
    if not isinstance(k, (int,)) or isinstance(k, bool) or not lo <= k <= n:
        raise DomainError(f"k must satisfy {lo} <= k <= n={n}, got {k!r}")


def elementary_symmetric(lam: Sequence) -> list:
    """Return [sigma_0, ..., sigma_n] via the recurrence for prod(1 + lam_i t).

    The recurrence e_j <- e_j + lam_i e_{j-1} builds the coefficients of
    the characteristic polynomial one factor at a time. It needs O(n^2)
    operations and has no cancellation-prone divisions.
    """
    vals = _as_list(lam)
    e = [1] + [0] * len(vals)
    for i, x in enumerate(vals, start=1):
        for j in range(i, 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e


def sigma(lam: Sequence, k: int):
    """k-th elementary symmetric function of ``lam``.

    Exact subset enumeration for n <= 12, the product recurrence otherwise.
    ``k = 0`` returns 1 (used by :func:`sigma_gradient`).
    """
    vals = _as_list(lam)
    n = len(vals)
    _check_k(k, n, allow_zero=True)
    if k == 0:
        return 1
    if n <= ENUMERATION_MAX_N:
        return sum(math.prod(c) for c in itertools.combinations(vals, k))
    return elementary_symmetric(vals)[k]


def sigma_gradient(lam: Sequence, k: int) -> list:
    """Partial derivatives d sigma_k / d lam_i = sigma_{k-1}(lam without i)."""
    vals = _as_list(lam)
    n = len(vals)
    _check_k(k, n)
    if k == 1:
        return [1] * n
    return [sigma(vals[:i] + vals[i + 1:], k - 1) for i in range(n)]


def first_cone_failure(lam: Sequence, k: int):
    """Smallest j <= k with sigma_j(lam) <= 0, or None if lam is in Gamma_k."""
    vals = _as_list(lam)
    _check_k(k, len(vals))
    e = elementary_symmetric(vals)
    for j in range(1, k + 1):
        if not e[j] > 0:
            return j
    return None


def in_gamma_k(lam: Sequence, k) -> bool:
    """Membership in the Garding cone: sigma_j(lam) > 0 for j = 1..k.

    ``k`` may be an int or a :class:`ConeSpec`.
    """
    if isinstance(k, ConeSpec):
        k = k.k
    return first_cone_failure(lam, k) is None


def f_k(lam: Sequence, k) -> float:
    """F_k = sigma_k^(1/k) on the open cone Gamma_k.

    Raises
    ------
    ConeViolation
        If lam is outside Gamma_k, including the boundary sigma_k = 0.
    """
    if isinstance(k, ConeSpec):
        k = k.k
    j = first_cone_failure(lam, k)
    if j is not None:
        raise ConeViolation(f"sigma_{j} <= 0: eigenvalues outside Gamma_{k}", index=j)
    return float(sigma(lam, k)) ** (1.0 / k)


def _falling(a: int, j: int) -> int:
    """Falling factorial a (a-1) ... (a-j+1); empty product is 1."""
    out = 1
    for i in range(j):
        out *= a - i
    return out


@dataclass(frozen=True)
class SignRow:
    k: int
    sign: int
    value_direct: int
    value_poly: int


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_table(n: int) -> list[SignRow]:
    """sigma_k(-1, 1, ..., 1) for k = 1..n by two exact integer routes.

    Direct route: the product recurrence on the integer vector.
    Polynomial route: with f(t) = (t - 1)(t + 1)^(n-1) = (t+1)^n - 2(t+1)^(n-1),
    the j-th derivative at 0 is j! sigma_{n-j}; it equals the falling
    factorial difference n^(j) - 2 (n-1)^(j), which for j >= 1 collapses to
    (n-1)(n-2)...(n-j+1)(2j - n).

    Raises
    ------
    InternalConsistencyError
        If the routes disagree or a sign differs from sign(n - 2k).
    """
    if not isinstance(n, int) or n < 2:
        raise DomainError(f"sign_table needs an integer n >= 2, got {n!r}")
    lam_bar = [-1] + [1] * (n - 1)
    direct = elementary_symmetric(lam_bar)

    # coefficients of (t - 1)(t + 1)^(n-1), lowest degree first
    binom = [math.comb(n - 1, i) for i in range(n)]
    coeffs = [0] * (n + 1)
    for i, b in enumerate(binom):
        coeffs[i + 1] += b
        coeffs[i] -= b

    rows = []
    for k in range(1, n + 1):
        j = n - k
        deriv = _falling(n, j) - 2 * _falling(n - 1, j)
        if j >= 1 and deriv != _falling(n - 1, j - 1) * (2 * j - n):
            raise InternalConsistencyError(f"derivative identity fails at n={n}, j={j}")
        if deriv != math.factorial(j) * coeffs[j]:
            raise InternalConsistencyError(f"Taylor coefficient mismatch at n={n}, j={j}")
        value_poly, rem = divmod(deriv, math.factorial(j))
        if rem:
            raise InternalConsistencyError(f"{deriv} not divisible by {j}! (n={n})")
        if direct[k] != value_poly:
            raise InternalConsistencyError(
                f"n={n}, k={k}: recurrence gives {direct[k]}, polynomial gives {value_poly}")
        s = _sign(value_poly)
        if s != _sign(n - 2 * k):
            raise InternalConsistencyError(f"n={n}, k={k}: sign {s} != sign(n-2k)")
        rows.append(SignRow(k, s, direct[k], value_poly))
    return rows
