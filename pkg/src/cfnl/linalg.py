"""Small dense symmetric eigensolver (cyclic Jacobi) and related helpers."""
from __future__ import annotations

import numpy as np

from .errors import DomainError

JACOBI_MAX_N = 16


def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


def jacobi_eigh(m, tol: float = 1e-15, max_sweeps: int = 50):
    """Cyclic Jacobi rotations; returns (ascending eigenvalues, eigenvectors).

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||m||_F``.
    """
    a = symmetrize(m).copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p, q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w)
    return w[order], v[:, order]


def eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix.

    Jacobi for n <= 16, LAPACK ``eigh`` above that.
    """
    m = symmetrize(m)
    if m.shape[0] <= JACOBI_MAX_N:
        return jacobi_eigh(m)[0]
    return np.linalg.eigvalsh(m)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Product of n random Householder reflections."""
    q = np.eye(n)
    for _ in range(n):
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        q = q - 2.0 * np.outer(q @ v, v)
    return q
