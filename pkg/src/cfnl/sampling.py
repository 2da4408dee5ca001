"""Deterministic low-discrepancy sampling of annuli and spheres."""
from __future__ import annotations

import numpy as np
from scipy.stats import norm, qmc


def _halton(dim: int, count: int, seed: int) -> np.ndarray:
    # Halton is extensible: the first m points of a longer run are the m-point set
    eng = qmc.Halton(d=dim, scramble=True, seed=seed)
    pts = eng.random(count)
    return np.clip(pts, 1e-12, 1 - 1e-12)


def sphere_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform unit vectors in R^n (Gaussian map of Halton points)."""
    g = norm.ppf(_halton(n, count, seed))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def annulus_points(n: int, count: int, r_min: float, r_max: float, seed: int = 0) -> np.ndarray:
    """Points with log-uniform radius in [r_min, r_max] and quasi-uniform direction."""
    q = _halton(n + 1, count, seed)
    radii = r_min * (r_max / r_min) ** q[:, 0]
    g = norm.ppf(q[:, 1:])
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    return radii[:, None] * dirs
