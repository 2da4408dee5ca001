"""Finite-difference superharmonicity checks on punctured lattices and a
discrete illustration of the two-plane lemma.

Lattice fields live on {-E..E}^n with spacing h and the origin node
removed (stored as NaN).
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BoundaryError, DomainError, HypothesisError
from .fields import AnalyticField
from .sampling import annulus_points

MAX_DENSE_N = 3
DEFAULT_EXTENT = 64  # 129 nodes per axis


@dataclass(frozen=True)
class GridField:
    h: float
    extent: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if not self.h > 0 or self.extent < 1:
            raise DomainError("need h > 0 and extent >= 1")
        if v.shape != (2 * self.extent + 1,) * v.ndim:
            raise DomainError(f"values shape {v.shape} does not match extent {self.extent}")
        v[(self.extent,) * v.ndim] = np.nan
        if np.sum(~np.isfinite(v)) != 1:
            raise DomainError("grid values must be finite away from the origin")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.ndim

    def coords(self) -> np.ndarray:
        """Array of shape values.shape + (n,) with node positions."""
        ax = self.h * np.arange(-self.extent, self.extent + 1)
        return np.stack(np.meshgrid(*([ax] * self.n), indexing="ij"), axis=-1)

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.coords(), axis=-1)

    @classmethod
    def from_function(cls, fn, n: int, h: float, extent: int = DEFAULT_EXTENT) -> "GridField":
        """Sample a vectorised callable (e.g. an AnalyticField) off the origin."""
        if n > MAX_DENSE_N:
            raise DomainError(f"dense lattices are capped at n={MAX_DENSE_N}; "
                              "use sampled_superharmonic_check")
        ax = h * np.arange(-extent, extent + 1)
        pts = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1)
        origin = (extent,) * n
        pts[origin] = np.ones(n)  # placeholder, overwritten below
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(pts), dtype=float)
        vals[origin] = np.nan
        return cls(h, extent, vals)

    @classmethod
    def from_radial(cls, profile, n: int, h: float, extent: int = DEFAULT_EXTENT) -> "GridField":
        """Lift a radial profile by a cubic spline of log u in log r."""
        order = np.argsort(profile.r)
        spline = CubicSpline(np.log(profile.r[order]), np.log(profile.u[order]))
        r_lo, r_hi = profile.r.min(), profile.r.max()
        need_lo, need_hi = h, np.sqrt(n) * extent * h
        if r_lo > need_lo * (1 + 1e-9) or r_hi < need_hi * (1 - 1e-9):
            raise DomainError(f"profile covers r in [{r_lo:g}, {r_hi:g}], "
                              f"grid needs [{need_lo:g}, {need_hi:g}]")

        def fn(pts):
            r = np.linalg.norm(pts, axis=-1)
            return np.exp(spline(np.log(np.clip(r, r_lo, r_hi))))

        return cls.from_function(fn, n, h, extent)

    @classmethod
    def from_csv(cls, path, h: float) -> "GridField":
        """Read rows ``i1,...,in,value`` with signed node indices."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        if not rows:
            raise DomainError(f"{path}: no grid rows")
        idx = np.array([[int(v) for v in r[:-1]] for r in rows])
        vals = np.array([float(r[-1]) for r in rows])
        n = idx.shape[1]
        extent = int(np.abs(idx).max())
        arr = np.full((2 * extent + 1,) * n, np.nan)
        arr[tuple((idx + extent).T)] = vals
        return cls(h, extent, arr)

    def to_csv(self, path) -> None:
        e = self.extent
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"i{j + 1}" for j in range(self.n)] + ["value"])
            for node in itertools.product(range(-e, e + 1), repeat=self.n):
                v = self.values[tuple(i + e for i in node)]
                if np.isfinite(v):
                    w.writerow(list(node) + [f"{v:.17g}"])


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def discrete_laplacian(field: GridField, node) -> float:
    """(2n+1)-point Laplacian at a node given by signed lattice indices."""
    node = tuple(int(i) for i in node)
    if len(node) != field.n:
        raise DomainError("node index has the wrong dimension")
    e = field.extent
    c = tuple(i + e for i in node)
    if not all(0 <= i <= 2 * e for i in c) or not np.isfinite(field.values[c]):
        raise BoundaryError(f"node {node} is not on the punctured grid")
    total = 0.0
    for axis in range(field.n):
        for step in (-1, 1):
            nb = list(c)
            nb[axis] += step
            if not 0 <= nb[axis] <= 2 * e or not np.isfinite(field.values[tuple(nb)]):
                raise BoundaryError(f"node {node} lacks its neighbour along axis {axis}")
            total += field.values[tuple(nb)] - field.values[c]
    return total / field.h ** 2


def _shifted(v, axis, k):
    """v shifted so that out[i] = v[i + k] along axis, NaN-padded."""
    out = np.full_like(v, np.nan)
    src = [slice(None)] * v.ndim
    dst = [slice(None)] * v.ndim
    if k > 0:
        src[axis], dst[axis] = slice(k, None), slice(None, -k)
    else:
        src[axis], dst[axis] = slice(None, k), slice(-k, None)
    out[tuple(dst)] = v[tuple(src)]
    return out


def laplacian_array(field: GridField) -> np.ndarray:
    """Discrete Laplacian at every node; NaN where a neighbour is missing."""
    v = field.values
    lap = np.zeros_like(v)
    for axis in range(field.n):
        lap += _shifted(v, axis, 1) + _shifted(v, axis, -1) - 2.0 * v
    return lap / field.h ** 2


def truncation_array(field: GridField) -> np.ndarray:
    """Leading stencil error estimate (h^2/12) sum_i |d_i^4 u| / h^4; NaN where unavailable."""
    v = field.values
    est = np.zeros_like(v)
    for axis in range(field.n):
        d4 = (_shifted(v, axis, 2) - 4 * _shifted(v, axis, 1) + 6 * v
              - 4 * _shifted(v, axis, -1) + _shifted(v, axis, -2))
        est += np.abs(d4)
    return est / (12.0 * field.h ** 2)


@dataclass(frozen=True)
class SuperharmonicResult:
    passes: bool
    worst_node: tuple | None
    worst_value: float
    checked: int

    def __bool__(self):
        return self.passes


def superharmonic_check(field: GridField, tol: float, exclude_radius: float | None = None,
                        truncation_correction: bool = True) -> SuperharmonicResult:
    """True iff the discrete Laplacian is <= tol at every checked node.

    Checked nodes have both first and second neighbours on every axis and
    lie at distance >= ``exclude_radius`` (default 10 h) from the puncture.
    With ``truncation_correction`` the estimated leading stencil error is
    subtracted first, so a smooth harmonic field is not flagged because of
    the O(h^2 |D^4 u|) term near the puncture; kinks are unaffected since
    their Laplacian is O(1/h) while the fourth difference term is smaller.
    """
    if exclude_radius is None:
        exclude_radius = 10 * field.h
    lap = laplacian_array(field)
    trunc = truncation_array(field)
    ok = np.isfinite(lap) & np.isfinite(trunc) & (field.radii() >= exclude_radius - 1e-12)
    excess = lap - trunc if truncation_correction else lap
    if not ok.any():
        return SuperharmonicResult(True, None, -np.inf, 0)
    masked = np.where(ok, excess, -np.inf)
    flat = int(np.argmax(masked))
    idx = np.unravel_index(flat, masked.shape)
    worst = float(masked[idx])
    node = tuple(int(i) - field.extent for i in idx)
    return SuperharmonicResult(worst <= tol, node, worst, int(ok.sum()))


def sampled_superharmonic_check(field: AnalyticField, h: float, count: int = 2000,
                                r_min: float = 0.05, r_max: float = 1.0, tol: float = 0.0,
                                seed: int = 0) -> SuperharmonicResult:
    """Stencil Laplacian of an analytic field at quasi-random centres (any n)."""
    n = field.n
    centres = annulus_points(n, count, r_min, r_max, seed)
    lap = -2.0 * n * field.value(centres)
    for axis in range(n):
        e = np.zeros(n)
        e[axis] = h
        lap = lap + field.value(centres + e) + field.value(centres - e)
    lap /= h * h
    i = int(np.argmax(lap))
    return SuperharmonicResult(bool(lap[i] <= tol), tuple(centres[i]), float(lap[i]), count)


@dataclass(frozen=True)
class TwoPlaneResult:
    passes: bool
    inf_by_shell: list = field(default_factory=list)
    margin: float = float("nan")
    superharmonic: SuperharmonicResult | None = None

    def to_dict(self) -> dict:
        return {
            "passes": bool(self.passes),
            "margin": float(self.margin),
            "inf_by_shell": [{"r": float(r), "inf": float(v)} for r, v in self.inf_by_shell],
            "criterion": "last three shell infima non-decreasing toward the puncture "
                         "and the innermost one above a",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def default_delta(c: float = 1.0) -> Callable:
    """delta(r) = c r^(3/2), an o(r) slack."""
    return lambda r: c * r ** 1.5


def two_plane_liminf(field: GridField, a: float, p, q, delta_bound: Callable | None = None,
                     superharmonic_tol: float = 1e-2, exclude_radius: float | None = None) -> TwoPlaneResult:
    """Shell infima of a superharmonic lattice field dominating two planes.

    Stages: (1) superharmonicity, (2) the lower bound
    u >= max(a + p.x, a + q.x) - delta(|x|) at every node, (3) infima over the
    dyadic shells r/2 <= |x| <= r. Finitely many shells cannot decide
    liminf > a, so the pass rule is a proxy: the last three infima are
    non-decreasing as r shrinks and the innermost exceeds a.

    Raises
    ------
    DomainError
        If p == q.
    HypothesisError
        If stage (1) or (2) fails; ``stage`` names which.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != (field.n,) or q.shape != (field.n,):
        raise DomainError("plane slopes have the wrong dimension")
    if np.array_equal(p, q):
        raise DomainError("the two planes must have different slopes (p != q)")
    delta_bound = delta_bound or default_delta()

    sh = superharmonic_check(field, superharmonic_tol, exclude_radius)
    if not sh.passes:
        err = HypothesisError(
            f"field is not superharmonic: discrete Laplacian {sh.worst_value:.3g} at node {sh.worst_node}")
        err.stage = "superharmonic"
        err.node = sh.worst_node
        raise err

    x = field.coords()
    r = np.linalg.norm(x, axis=-1)
    v = field.values
    live = np.isfinite(v)
    lower = a + np.maximum(x @ p, x @ q) - delta_bound(r)
    slack = 1e-12 * max(1.0, float(np.nanmax(np.abs(v))))
    bad = live & (v < lower - slack)
    if bad.any():
        idx = np.argwhere(bad)[0]
        node = tuple(int(i) - field.extent for i in idx)
        err = HypothesisError(f"two-plane lower bound fails at node {node}")
        err.stage = "lower_bound"
        err.node = node
        raise err

    shells = []
    radius = field.extent * field.h
    while radius / 2 >= field.h:
        m = live & (r >= radius / 2) & (r <= radius)
        if m.any():
            shells.append((radius, float(v[m].min())))
        radius /= 2
    if len(shells) < 3:
        return TwoPlaneResult(False, shells, superharmonic=sh)
    tail = [s[1] for s in shells[-3:]]
    monotone = tail[0] <= tail[1] <= tail[2]
    margin = tail[-1] - a
    return TwoPlaneResult(bool(monotone and margin > 0), shells, margin, sh)
