"""Moving-sphere checks: u_{x,lam} <= u, the critical radius, and the ratio estimate."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .conformal import INVERSION, MobiusMap
from .errors import DomainError
from .fields import DELTA_SING, AnalyticField
from .sampling import annulus_points, sphere_directions

log = logging.getLogger(__name__)

DEFAULT_POINTS = 10_000
DEFAULT_R_MIN = 1e-3
DEFICIT_TOL = 1e-10


@dataclass(frozen=True)
class SampledDomain:
    """Quasi-random points of the annulus r_min <= |y| <= r_max.

    ``h`` is the radial grid step: the largest gap between consecutive
    sample radii, counting the gaps to r_min and r_max.
    """

    points: np.ndarray
    r_min: float
    r_max: float
    seed: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if not 0 < self.r_min < self.r_max:
            raise DomainError(f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms < self.r_min * (1 - 1e-12)) or np.any(norms > self.r_max * (1 + 1e-12)):
            raise DomainError("sample points outside the annulus")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def annulus(cls, n: int, count: int = DEFAULT_POINTS, r_min: float = DEFAULT_R_MIN,
                r_max: float = 1.0, seed: int = 0) -> "SampledDomain":
        return cls(annulus_points(n, count, r_min, r_max, seed), r_min, r_max, seed)

    def refined(self) -> "SampledDomain":
        """Twice as many points; contains the current points."""
        return SampledDomain.annulus(self.n, 2 * len(self), self.r_min, self.r_max, self.seed)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    @property
    def h(self) -> float:
        radii = np.sort(np.linalg.norm(self.points, axis=1))
        edges = np.concatenate([[self.r_min], radii, [self.r_max]])
        return float(np.max(np.diff(edges)))


@dataclass(frozen=True)
class SphereCheckResult:
    lambda_bar: float
    violations: list = field(default_factory=list)
    touched_at: np.ndarray | None = None
    diagnostic: str | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "lambda_bar": float(self.lambda_bar),
            "violations": [{"point": [float(v) for v in p], "deficit": float(d)}
                           for p, d in self.violations],
            "touched_at": None if self.touched_at is None else [float(v) for v in self.touched_at],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SphereCheckResult":
        t = d.get("touched_at")
        return cls(d["lambda_bar"],
                   [(np.asarray(v["point"]), v["deficit"]) for v in d["violations"]],
                   None if t is None else np.asarray(t))


def ms_value(field: AnalyticField, x, lam: float, y):
    """u_{x,lam}(y) = (lam/|y-x|)^(n-2) u(x + lam^2 (y-x)/|y-x|^2); vectorised in y."""
    return MobiusMap(x, lam, INVERSION).weight(y) * field.value(MobiusMap(x, lam).image(y))


def _deficits(field, x, lam, pts):
    x = np.asarray(x, dtype=float)
    dist = np.linalg.norm(pts - x, axis=1)
    keep = (dist >= lam) & (dist > DELTA_SING)
    sel = pts[keep]
    if len(sel) == 0:
        return sel, np.empty(0)
    return sel, field.value(sel) - ms_value(field, x, lam, sel)


def _raw_check(field, x, lam, pts, tol):
    sel, d = _deficits(field, x, lam, pts)
    bad = d < -tol
    viol = [(p, float(-v)) for p, v in zip(sel[bad], d[bad])]
    touched = None
    if len(d):
        i = int(np.argmin(d))
        if abs(d[i]) <= tol:
            touched = sel[i]
    return viol, touched


def ms_inequality(field: AnalyticField, x, lam: float, domain: SampledDomain,
                  tol: float = DEFICIT_TOL, refine: bool = True) -> SphereCheckResult:
    """Check u(y) - u_{x,lam}(y) >= -tol on the domain points with |y-x| >= lam.

    A violation is only reported if it persists on the 2x refined domain;
    the refined points carry the reported violations.
    """
    if not lam > 0 or not tol > 0:
        raise DomainError("lam and tol must be positive")
    viol, touched = _raw_check(field, x, lam, domain.points, tol)
    if viol and refine:
        viol, touched = _raw_check(field, x, lam, domain.refined().points, tol)
    return SphereCheckResult(lam, viol, touched)


def critical_lambda(field: AnalyticField, x, domain: SampledDomain, tol: float = 1e-6,
                    deficit_tol: float = DEFICIT_TOL, refine: bool = True) -> SphereCheckResult:
    """Largest admissible lam in [h, 2|x|] by bisection, to bisection width <= tol.

    The upper end deliberately exceeds |x| so an overshoot is visible. The
    returned result carries the violations found just above lambda_bar.
    A point too close to the puncture (|x| < 2 r_min) or with no admissible
    probe gives lambda_bar = 0 and a diagnostic.
    """
    x = np.asarray(x, dtype=float)
    dx = float(np.linalg.norm(x))
    if dx < 2 * domain.r_min:
        return SphereCheckResult(0.0, diagnostic=f"|x|={dx:g} below 2 r_min={2 * domain.r_min:g}")

    def check(lam):
        return ms_inequality(field, x, lam, domain, deficit_tol, refine)

    lo, hi = domain.h, 2.0 * dx
    first = check(lo)
    if not first.ok:
        return SphereCheckResult(0.0, first.violations, diagnostic=f"violations already at lam={lo:g}")
    top = check(hi)
    if top.ok:
        return SphereCheckResult(hi, [], top.touched_at, diagnostic="no violation up to 2|x|")
    evidence = top
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = check(mid)
        if res.ok:
            lo = mid
        else:
            hi, evidence = mid, res
    return SphereCheckResult(lo, evidence.violations, check(lo).touched_at)


def ratio_estimate(field: AnalyticField, radii, samples_per_sphere: int = 256, seed: int = 0):
    """[(r, max over sphere pairs |u(x)/u(y) - 1|)] for each radius."""
    out = []
    for r in radii:
        if not 0 < r < 1:
            raise DomainError(f"radii must lie in (0, 1), got {r}")
        vals = field.value(r * sphere_directions(field.n, samples_per_sphere, seed))
        out.append((float(r), float(vals.max() / vals.min() - 1.0)))
    return out
