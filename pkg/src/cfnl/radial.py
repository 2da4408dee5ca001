"""Radial reduction of F_k(A^u) = 1: exact singular solutions, shooting, estimators.

For u = u(r), A^u = diag(lambda1, lambda2, ..., lambda2) at (r, 0, ..., 0) with

    lambda1 = -2/(n-2) u^(-(n+2)/(n-2)) u'' + 2(n-1)/(n-2)^2 u^(-2n/(n-2)) u'^2
    lambda2 = -2/(n-2) u^(-(n+2)/(n-2)) u'/r - 2/(n-2)^2 u^(-2n/(n-2)) u'^2
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (ConeViolation, DegenerateClosure, DomainError, EstimationError,
                     InternalConsistencyError, IntegrationError, PositivityError)
from .fields import PowerField
from .symfunc import elementary_symmetric, f_k, first_cone_failure

log = logging.getLogger(__name__)

CLOSURE_EPS = 1e-12
U_FLOOR = 1e-12
UPP_CEILING = 1e12
STEPS_PER_DECADE = 4096
CSV_HEADER = ("r", "u", "up", "lambda1", "lambda2")


@dataclass(frozen=True)
class RadialState:
    r: float
    u: float
    up: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"radius must be positive, got {self.r}")
        if not self.u > 0:
            raise PositivityError(f"u must be positive, got {self.u}")


def _check_n(n):
    if n < 3:
        raise DomainError(f"radial reduction needs n >= 3, got {n}")


def radial_eigs_arrays(r, u, up, upp, n):
    """Vectorised (lambda1, lambda2)."""
    r, u, up, upp = (np.asarray(v, dtype=float) for v in (r, u, up, upp))
    a = u ** (-(n + 2) / (n - 2))
    b = u ** (-2.0 * n / (n - 2))
    lam1 = -2.0 / (n - 2) * a * upp + 2.0 * (n - 1) / (n - 2) ** 2 * b * up * up
    lam2 = -2.0 / (n - 2) * a * up / r - 2.0 / (n - 2) ** 2 * b * up * up
    return lam1, lam2


def radial_eigs(state: RadialState, upp: float, n: int) -> tuple[float, float]:
    """The two distinct eigenvalues of A^u for a radial u at radius ``state.r``."""
    _check_n(n)
    if not state.u > 0:
        raise PositivityError("u must be positive")
    l1, l2 = radial_eigs_arrays(state.r, state.u, state.up, upp, n)
    return float(l1), float(l2)


def radial_vector(lam1: float, lam2: float, n: int) -> list[float]:
    return [lam1] + [lam2] * (n - 1)


def _closure(r, u, up, n, k):
    """u'' with sigma_k(lambda1, lambda2, ..., lambda2) = 1; plain floats for speed."""
    if not u > 0:
        raise PositivityError(f"u = {u} <= 0 at r={r}")
    ex = 2.0 / (n - 2)
    b = u ** (-2.0 * n / (n - 2))
    lam2 = -ex * u ** (-(n + 2) / (n - 2)) * up / r - ex * ex / 2.0 * b * up * up
    coef = math.comb(n - 1, k - 1) * lam2 ** (k - 1)
    if abs(coef) <= CLOSURE_EPS:
        raise DegenerateClosure(
            f"closure coefficient C({n - 1},{k - 1}) lambda2^{k - 1} = {coef:.3e} vanishes")
    lam1 = (1.0 - math.comb(n - 1, k) * lam2 ** k) / coef
    j = first_cone_failure(radial_vector(lam1, lam2, n), k)
    if j is not None:
        raise ConeViolation(f"radial eigenvalues leave Gamma_{k} (sigma_{j} <= 0) at r={r}",
                            index=j, point=r)
    upp = (ex * ex / 2.0 * (n - 1) * b * up * up - lam1) * (n - 2) / 2.0 * u ** ((n + 2) / (n - 2))
    return upp


def close_u2prime(state: RadialState, n: int, k: int) -> float:
    """Second derivative making F_k(A^u) = 1 at the given radial state.

    sigma_k(lambda1, lambda2 1_{n-1}) = C(n-1,k-1) lambda2^(k-1) lambda1 + C(n-1,k) lambda2^k
    is affine in lambda1; solve for lambda1, then invert the lambda1 formula.
    """
    _check_n(n)
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}")
    return _closure(state.r, state.u, state.up, n, k)


@dataclass(frozen=True)
class ExactPowerSolution:
    """u = amplitude * r^exponent with exponent -(n-2)/2 and F_k(A^u) = 1."""

    n: int
    k: int
    amplitude: float
    exponent: float

    def field(self) -> PowerField:
        return PowerField(self.n, self.exponent, self.amplitude)

    def u(self, r):
        return self.amplitude * np.asarray(r, dtype=float) ** self.exponent

    def state(self, r: float) -> RadialState:
        p, a = self.exponent, self.amplitude
        return RadialState(r, a * r ** p, a * p * r ** (p - 1))

    def profile(self, r) -> "RadialProfile":
        return RadialProfile.from_power(self.n, self.k, self.exponent, self.amplitude, r)


def exact_power(n: int, k: int) -> ExactPowerSolution:
    """Amplitude a with F_k(A^{a r^{-(n-2)/2}}) = 1, for 1 <= k < n/2.

    A^{a u} = a^{-4/(n-2)} A^u and lambda(A^{r^{-(n-2)/2}}) = (-1/2, 1/2, ..., 1/2), so
    a = (2^{-k} sigma_k(-1, 1, ..., 1))^{(n-2)/(4k)}.
    """
    _check_n(n)
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}")
    s = elementary_symmetric([-1] + [1] * (n - 1))[k]
    if 2 * k >= n or s <= 0:
        raise ConeViolation(
            f"sigma_{k}(-1,1,...,1) = {s} <= 0 for n={n}: no singular power solution", index=k)
    amp = (s / 2.0 ** k) ** ((n - 2) / (4.0 * k))
    sol = ExactPowerSolution(n, k, amp, -(n - 2) / 2.0)
    for r in np.geomspace(1e-3, 1e3, 20):
        st = sol.state(r)
        upp = sol.amplitude * sol.exponent * (sol.exponent - 1) * r ** (sol.exponent - 2)
        val = f_k(radial_vector(*radial_eigs(st, upp, n), n), k)
        if abs(val - 1.0) > 1e-12:
            raise InternalConsistencyError(f"F_{k} = {val} != 1 at r={r} for the power solution")
    return sol


@dataclass(frozen=True)
class RadialProfile:
    """Discrete radial solution. ``flag`` is None when the integration completed."""

    r: np.ndarray
    u: np.ndarray
    up: np.ndarray
    upp: np.ndarray
    n: int
    k: int
    flag: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arrays = [np.asarray(getattr(self, a), dtype=float) for a in ("r", "u", "up", "upp")]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise DomainError("profile arrays must be 1-d and of equal length")
        r = arrays[0]
        d = np.diff(r)
        if len(r) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError("profile radii must be strictly monotone")
        if np.any(arrays[1] <= 0) or np.any(r <= 0):
            raise DomainError("profile needs r > 0 and u > 0")
        for name, a in zip(("r", "u", "up", "upp"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return len(self.r)

    @property
    def completed(self) -> bool:
        return self.flag is None

    @property
    def eigs(self):
        return radial_eigs_arrays(self.r, self.u, self.up, self.upp, self.n)

    @property
    def laplacian(self) -> np.ndarray:
        return self.upp + (self.n - 1) * self.up / self.r

    def states(self) -> list[RadialState]:
        return [RadialState(*v) for v in zip(self.r, self.u, self.up)]

    def operator_values(self) -> np.ndarray:
        """F_k at each node (NaN where the cone test fails)."""
        out = []
        for l1, l2 in zip(*self.eigs):
            try:
                out.append(f_k(radial_vector(l1, l2, self.n), self.k))
            except ConeViolation:
                out.append(np.nan)
        return np.array(out)

    @classmethod
    def from_power(cls, n, k, exponent, amplitude, r):
        """Closed-form profile of amplitude * r^exponent on the given radii."""
        r = np.asarray(r, dtype=float)
        p, c = exponent, amplitude
        return cls(r, c * r ** p, c * p * r ** (p - 1), c * p * (p - 1) * r ** (p - 2), n, k,
                   meta={"source": f"power {c:g} r^{p:g}"})

    def to_csv(self, path) -> None:
        l1, l2 = self.eigs
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in zip(self.r, self.u, self.up, l1, l2):
                w.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path, n: int, k: int) -> "RadialProfile":
        """Read a profile; u'' is recovered from the lambda1 column."""
        path = Path(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or tuple(rows[0]) != CSV_HEADER:
            raise DomainError(f"{path}: expected header {','.join(CSV_HEADER)}")
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        r, u, up, l1 = data[:, 0], data[:, 1], data[:, 2], data[:, 3]
        c = 2.0 / (n - 2)
        upp = (c * c / 2 * (n - 1) * u ** (-2.0 * n / (n - 2)) * up * up - l1) \
            * (n - 2) / 2 * u ** ((n + 2) / (n - 2))
        return cls(r, u, up, upp, n, k, meta={"source": str(path)})


def shoot(init: RadialState, r_target: float, steps: int, n: int, k: int) -> RadialProfile:
    """Integrate F_k(A^u) = 1 radially from ``init`` to ``r_target``.

    Classical RK4 in t = log r on (u, u'). Integration stops early, with
    ``flag`` set, on a cone violation, a degenerate closure, u < 1e-12 or
    |u''| > 1e12; the nodes computed so far are returned.
    """
    _check_n(n)
    if steps < 100:
        raise DomainError(f"steps must be >= 100, got {steps}")
    if not r_target > 0:
        raise DomainError("r_target must be positive")
    dt = (math.log(r_target) - math.log(init.r)) / steps
    if abs(dt) < 1e-14:
        raise IntegrationError(f"step size {dt:.3e} underflows")

    def rhs(t, u, up):
        r = math.exp(t)
        return r * up, r * _closure(r, u, up, n, k)

    t0 = math.log(init.r)
    try:
        upp0 = _closure(init.r, init.u, init.up, n, k)
    except (ConeViolation, DegenerateClosure) as exc:
        raise type(exc)(f"initial state rejected: {exc}") from None

    rs, us, ups, upps = [init.r], [init.u], [init.up], [upp0]
    u, up = init.u, init.up
    flag = None
    for i in range(steps):
        t = t0 + i * dt
        try:
            k1 = rhs(t, u, up)
            k2 = rhs(t + dt / 2, u + dt / 2 * k1[0], up + dt / 2 * k1[1])
            k3 = rhs(t + dt / 2, u + dt / 2 * k2[0], up + dt / 2 * k2[1])
            k4 = rhs(t + dt, u + dt * k3[0], up + dt * k3[1])
            u_new = u + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            up_new = up + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            if not u_new > U_FLOOR:
                flag = "u_vanishes"
                break
            r_new = init.r * math.exp((i + 1) * dt) if i + 1 < steps else r_target
            upp_new = _closure(r_new, u_new, up_new, n, k)
        except ConeViolation:
            flag = "cone_violation"
            break
        except DegenerateClosure:
            flag = "degenerate_closure"
            break
        except PositivityError:
            flag = "u_vanishes"
            break
        except (OverflowError, ZeroDivisionError, ValueError):
            flag = "overflow"
            break
        if abs(upp_new) > UPP_CEILING or not math.isfinite(upp_new):
            flag = "upp_blowup"
            break
        u, up = u_new, up_new
        rs.append(r_new)
        us.append(u)
        ups.append(up)
        upps.append(upp_new)
    if flag:
        log.info("shoot stopped at r=%g after %d steps: %s", rs[-1], len(rs) - 1, flag)
    return RadialProfile(np.array(rs), np.array(us), np.array(ups), np.array(upps), n, k, flag,
                         meta={"init": (init.r, init.u, init.up), "r_target": r_target,
                               "steps": steps})


def _window_mask(profile: RadialProfile, window):
    if window is None:
        return np.ones(len(profile), dtype=bool)
    lo, hi = sorted(window)
    return (profile.r >= lo) & (profile.r <= hi)


def exponent_fit(profile: RadialProfile, window=None) -> float:
    """Least-squares slope of log u against log r over the window."""
    m = _window_mask(profile, window)
    if m.sum() < 10:
        raise EstimationError(f"window {window} holds {m.sum()} nodes, need >= 10")
    slope, _ = np.polyfit(np.log(profile.r[m]), np.log(profile.u[m]), 1)
    return float(slope)


@dataclass(frozen=True)
class GrowthBound:
    sup: float
    last_decade_increase: float
    r_reached: float

    @property
    def stabilized(self) -> bool:
        return self.last_decade_increase < 0.01


def growth_bound(profile: RadialProfile, exponent: float | None = None) -> GrowthBound:
    """Running sup of r^((n-2)/2) u toward the smaller radii of the profile.

    ``last_decade_increase`` is the relative growth of the running sup
    over the last decade of radii reached.
    """
    e = (profile.n - 2) / 2 if exponent is None else exponent
    order = np.argsort(-profile.r)
    r = profile.r[order]
    g = r ** e * profile.u[order]
    running = np.maximum.accumulate(g)
    r_end = r[-1]
    before = running[r > 10 * r_end]
    inc = (running[-1] / before[-1] - 1.0) if len(before) else math.inf
    return GrowthBound(float(running[-1]), float(inc), float(r_end))


@dataclass(frozen=True)
class XiDiagnostics:
    holder_seminorm: float
    lipschitz_seminorm: float
    convexity_min: float


def _pair_seminorm(r, xi, alpha, min_sep=2, chunk=512):
    n = len(r)
    best = 0.0
    for start in range(0, n, chunk):
        i = np.arange(start, min(start + chunk, n))
        dr = np.abs(r[i, None] - r[None, :])
        dx = np.abs(xi[i, None] - xi[None, :])
        sep = np.abs(i[:, None] - np.arange(n)[None, :]) >= min_sep
        if not sep.any():
            continue
        q = dx[sep] / dr[sep] ** alpha
        best = max(best, float(q.max()))
    return best


def xi_diagnostics(profile: RadialProfile, alpha: float, window=None) -> XiDiagnostics:
    """Hoelder/Lipschitz seminorms and convexity margin of xi = u^(-2/(n-2)).

    Seminorms use node pairs at least two grid steps apart. The convexity
    margin is min over interior nodes of xi'' - 2/(n-2)^2 u^((2-2n)/(n-2)) u'^2,
    the radial part of D^2 xi >= 2/(n-2)^2 u^((2-2n)/(n-2)) |Du|^2 I which
    holds whenever A^u is positive semi-definite.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    n = profile.n
    m = _window_mask(profile, window)
    order = np.argsort(profile.r[m])
    r = profile.r[m][order]
    u = profile.u[m][order]
    up = profile.up[m][order]
    xi = u ** (-2.0 / (n - 2))
    if len(r) < 3:
        raise EstimationError("need at least 3 nodes")
    holder = _pair_seminorm(r, xi, alpha)
    lip = _pair_seminorm(r, xi, 1.0)
    h0, h1 = np.diff(r)[:-1], np.diff(r)[1:]
    xi_rr = 2.0 * ((xi[2:] - xi[1:-1]) / h1 - (xi[1:-1] - xi[:-2]) / h0) / (h0 + h1)
    bound = 2.0 / (n - 2) ** 2 * u[1:-1] ** ((2.0 - 2 * n) / (n - 2)) * up[1:-1] ** 2
    return XiDiagnostics(holder, lip, float(np.min(xi_rr - bound)))


def holder_seminorm(profile: RadialProfile, exponent: float, window=None) -> float:
    """sup |xi(r) - xi(s)| / |r - s|^exponent over node pairs two or more steps apart."""
    if not exponent > 0:
        raise DomainError(f"exponent must be positive, got {exponent}")
    m = _window_mask(profile, window)
    if m.sum() < 3:
        raise EstimationError("need at least 3 nodes in the window")
    order = np.argsort(profile.r[m])
    r = profile.r[m][order]
    xi = profile.u[m][order] ** (-2.0 / (profile.n - 2))
    return _pair_seminorm(r, xi, exponent)


def holder_exponent(n: int, k: int) -> float:
    """(2k - n)/k, the Hoelder exponent of xi for n/2 < k <= n."""
    if not n / 2 < k <= n:
        raise DomainError(f"Hoelder exponent needs n/2 < k <= n, got n={n}, k={k}")
    return (2 * k - n) / k


def synthetic_xi_profile(n: int, k: int, alpha: float, r, c: float = 1.0) -> RadialProfile:
    """Profile with xi = c r^alpha, i.e. u = c^(-(n-2)/2) r^(-(n-2) alpha / 2)."""
    return RadialProfile.from_power(n, k, -(n - 2) * alpha / 2, c ** (-(n - 2) / 2), r)
