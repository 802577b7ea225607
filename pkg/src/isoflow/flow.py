"""Mean curvature vector fields on the Weyl chamber and their numerical flows.

The Euclidean field at a chamber point x is ``-sum_a m_a a / <x, a>``; the
spherical field adds ``n x``; the focal field restricts the sum to the roots
that do not vanish on the stratum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _dopri
from .errors import NotCollapsed, NotOnSphere, OutsideChamber, WallContact
from .weyl import (
    ChamberPoint,
    RootSystem,
    coords_of,
    project_to_stratum,
    stratum_of,
    wall_gaps,
)

WALL_RTOL = 1e-12          # |gap| below this * |x| counts as wall contact in a denominator
COLLAPSE_GAP = 1e-7        # relative min gap that ends a run at a wall
ORIGIN_RATIO = 1e-6        # |x|^2 / |x0|^2 that ends a run at the origin
WALL_STEP_FRACTION = 0.25  # a step may move at most this fraction of the smallest gap
# a start whose spherical field is this small (relative to n) is the minimal
# direction up to rounding
MINIMAL_RTOL = 1e-10
FIT_WINDOW = (1e-5, 1e-2)  # (T - t) / T window for the rate fits
VARIANTS = ("euclidean", "spherical", "focal")


def _field(rs, x, active, what):
    roots = rs.positive_roots[active]
    m = np.asarray(rs.multiplicities, dtype=float)[active]
    g = roots @ x
    _check_gaps(g, x, what)
    return -(m / g) @ roots


def _check_gaps(g, x, what):
    if np.any(np.abs(g) <= WALL_RTOL * max(np.linalg.norm(x), 1e-300)):
        raise WallContact(f"{what}: wall gap {np.abs(g).min():.3e} too small")


def mcv_euclidean(rs: RootSystem, x) -> np.ndarray:
    x = coords_of(x)
    return _field(rs, x, slice(None), "mcv_euclidean")


def mcv_spherical(rs: RootSystem, x, sphere_tol: float = 1e-8) -> np.ndarray:
    x = coords_of(x)
    if abs(x @ x - 1.0) > sphere_tol:
        raise NotOnSphere(f"|x|^2 = {x @ x!r} is not 1")
    return mcv_euclidean(rs, x) + rs.n * x


def _active(rs, stratum):
    return np.array([i for i in range(rs.n_roots) if i not in stratum], dtype=int)


def mcv_focal(rs: RootSystem, x, stratum) -> np.ndarray:
    """Mean curvature vector of the focal leaf through a stratum point."""
    x = coords_of(x)
    return _field(rs, x, _active(rs, frozenset(stratum)), "mcv_focal")


def second_fundamental_bound(rs: RootSystem, x, stratum=frozenset()) -> float:
    """Q(x) = sum_a m_a / <x, a>^2, the bound on |II|^2 used for type-I rates."""
    x = coords_of(x)
    act = _active(rs, frozenset(stratum))
    g = rs.positive_roots[act] @ x
    _check_gaps(g, x, "second_fundamental_bound")
    m = np.asarray(rs.multiplicities, dtype=float)[act]
    return float(np.sum(m / g**2))


@dataclass(frozen=True)
class CollapseReport:
    T: float
    x_limit: ChamberPoint
    active_walls: tuple
    fiber_dim: int
    rate_estimate: float
    typeI_estimate: float
    top_stratum: bool
    limit: str = "wall"               # "wall" or "origin"
    heuristic_extrapolation: bool = False

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "x_limit": [float(v) for v in self.x_limit.coords],
            "active_walls": [int(i) for i in self.active_walls],
            "fiber_dim": int(self.fiber_dim),
            "rate_estimate": self.rate_estimate,
            "typeI_estimate": self.typeI_estimate,
            "top_stratum": bool(self.top_stratum),
            "limit": self.limit,
            "heuristic_extrapolation": bool(self.heuristic_extrapolation),
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    rs: RootSystem
    variant: str
    t: np.ndarray
    x: np.ndarray
    dxdt: np.ndarray
    n_effective: int
    stratum: frozenset = frozenset()
    stop_reason: str = "t_end"
    collapse: CollapseReport | None = None
    tol: float = 1e-10
    backward: bool = False

    @property
    def samples(self):
        return list(zip(self.t, self.x))

    @property
    def x0(self) -> np.ndarray:
        return self.x[0]

    @property
    def active(self) -> np.ndarray:
        return _active(self.rs, self.stratum)

    @property
    def norm_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.x, self.x)

    @property
    def gaps(self) -> np.ndarray:
        return self.x @ self.rs.positive_roots[self.active].T

    @property
    def min_wall_gap(self) -> np.ndarray:
        return np.abs(self.gaps).min(axis=1)

    @property
    def radial_residual(self) -> np.ndarray:
        """|x|^2 - (|x0|^2 - 2 n t) for flat flows; |x|^2 - |x0|^2 on the sphere."""
        r0 = self.norm_sq[0]
        if self.variant == "spherical":
            return np.abs(self.norm_sq - r0)
        return np.abs(self.norm_sq - (r0 - 2 * self.n_effective * self.t))

    def at(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation between recorded samples."""
        ts = self.t if not self.backward else -self.t
        s = t if not self.backward else -t
        j = int(np.searchsorted(ts, s))
        if j < len(ts) and ts[j] == s:
            return self.x[j].copy()
        if j == 0 or j >= len(ts):
            raise ValueError(f"t={t} outside the recorded range")
        t0, t1 = self.t[j - 1], self.t[j]
        h = t1 - t0
        u = (t - t0) / h
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return (h00 * self.x[j - 1] + h10 * h * self.dxdt[j - 1]
                + h01 * self.x[j] + h11 * h * self.dxdt[j])


def is_minimal_direction(rs: RootSystem, x, rtol: float = MINIMAL_RTOL) -> bool:
    """True when x / |x| zeroes the spherical field to within rtol * n."""
    u = np.array(coords_of(x), dtype=float)
    u = u / np.linalg.norm(u)
    g = wall_gaps(rs, u)
    if np.any(g >= 0):
        return False
    return float(np.linalg.norm(mcv_euclidean(rs, u) + rs.n * u)) <= rtol * rs.n


def integrate(rs: RootSystem, x0, variant: str = "euclidean", t_end: float | None = None,
              tol: float = 1e-10, stratum=None, t_eval=(), backward: bool = False,
              detect: bool = True) -> Trajectory:
    """Integrate one of the chamber flows with an embedded 5(4) Runge-Kutta pair.

    Runs stop at ``t_end``, when the smallest wall gap falls below
    ``COLLAPSE_GAP * |x|`` or when ``|x|^2`` falls below ``ORIGIN_RATIO * |x0|^2``.
    On a collapse stop a CollapseReport is attached (``detect=True``).
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if variant == "focal" and stratum is None and isinstance(x0, ChamberPoint):
        stratum = x0.stratum
    x0 = np.array(coords_of(x0), dtype=float)
    if variant == "focal":
        st = stratum_of(rs, x0)
        stratum = st.vanishing if stratum is None else frozenset(stratum)
        if not stratum <= st.vanishing:
            raise OutsideChamber("x0 does not lie on the requested stratum")
        x0 = project_to_stratum(rs, x0, stratum)
    else:
        if stratum:
            raise ValueError("stratum is only meaningful for the focal variant")
        stratum = frozenset()
    act = _active(rs, stratum)
    n_eff = int(sum(rs.multiplicities[i] for i in act))
    if n_eff == 0:
        raise OutsideChamber("x0 lies on the minimal stratum (every wall vanishes)")
    g0 = rs.positive_roots[act] @ x0
    if np.any(g0 >= 0):
        raise OutsideChamber("x0 is not in the open chamber (or open stratum)")
    _check_gaps(g0, x0, "integrate")
    if variant == "spherical" and abs(x0 @ x0 - 1.0) > 1e-8:
        raise NotOnSphere("spherical flow needs a unit start")

    roots = rs.positive_roots[act]
    m = np.asarray(rs.multiplicities, dtype=float)[act]
    n = float(n_eff)
    sign = -1.0 if backward else 1.0
    spherical = variant == "spherical"

    def fun(t, x):
        g = roots @ x
        if np.any(g >= 0.0):
            return None
        v = -(m / g) @ roots
        if spherical:
            v = v + n * x
        return v

    r0 = float(x0 @ x0)
    if t_end is None:
        t_end = 60.0 / n if spherical else r0 / (2 * n) * 1.001
    t_end = float(t_end)
    t_stop = -t_end if backward else t_end

    def max_step(t, x, f):
        g = np.abs(roots @ x).min()
        return WALL_STEP_FRACTION * g / max(np.linalg.norm(f), 1e-300)

    # 1% below the reported bound, so recomputing the residual from stored
    # samples cannot round past it
    budget = 9.9 * tol

    def accept(t, x):
        if spherical or backward:
            return True
        return abs(x @ x - (r0 - 2 * n * t)) <= budget * (1 + abs(t))

    def stop(t, x, f):
        nx = x @ x
        if not spherical and nx <= ORIGIN_RATIO * r0:
            return True
        return np.abs(roots @ x).min() <= COLLAPSE_GAP * math.sqrt(nx)

    ts, xs, fs, reason = _dopri.solve(
        fun, 0.0, x0, t_stop, rtol=tol, atol=tol, max_step=max_step,
        accept=accept, stop=stop, t_eval=[sign * s for s in t_eval])
    if reason == "stop":
        last = xs[-1]
        reason = "origin" if (not spherical and last @ last <= ORIGIN_RATIO * r0) else "wall"
    # the homothetic flow from p0 is unstable: rounding alone pushes it onto a
    # wall close to the origin, which is not a genuine wall limit
    if reason in ("wall", "underflow") and variant == "euclidean" and not backward \
            and is_minimal_direction(rs, x0):
        reason = "origin"
    traj = Trajectory(rs, variant, ts, xs, fs, n_eff, stratum, reason, None, tol, backward)
    if detect and reason in ("wall", "origin", "underflow") and not backward:
        traj = replace(traj, collapse=detect_collapse(rs, traj))
    return traj


def _fit_limit(tau, values, T):
    """Least-squares fit of values ~ a + b sqrt(tau/T) + c tau/T; returns a."""
    u = np.sqrt(tau / T)
    A = np.column_stack([np.ones_like(u), u, u**2])
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return float(coef[0])


def detect_collapse(rs: RootSystem, traj: Trajectory) -> CollapseReport:
    """Extrapolated collapse time, limit point and singularity rates."""
    if traj.stop_reason not in ("wall", "origin", "underflow"):
        raise NotCollapsed(f"run ended with {traj.stop_reason!r} before collapse")
    act = traj.active
    roots = rs.positive_roots[act]
    mult = np.asarray(rs.multiplicities)[act]
    n = traj.n_effective
    xl, fl, tl = traj.x[-1], traj.dxdt[-1], float(traj.t[-1])
    spherical = traj.variant == "spherical"
    heuristic = False

    if traj.stop_reason == "origin":
        T = tl + float(xl @ xl) / (2 * n)
        x_lim = np.zeros_like(xl)
        vanish = tuple(int(i) for i in act)
        limit = "origin"
    else:
        g = roots @ xl
        gmin = np.abs(g).min()
        sel = np.abs(g) <= 100 * gmin
        vanish = tuple(int(i) for i in act[sel])
        # sum of squared vanishing gaps decays linearly in T - t
        s = float(np.sum(g[sel] ** 2))
        ds = float(2 * np.sum(g[sel] * (roots[sel] @ fl)))
        T = tl - s / ds if ds < 0 else tl
        x_lim = project_to_stratum(rs, xl, set(vanish) | set(traj.stratum))
        if spherical:
            x_lim = x_lim / np.linalg.norm(x_lim)
        limit = "wall"
        heuristic = len(vanish) > 1

    fiber = int(sum(rs.multiplicities[i] for i in vanish))
    tau = T - traj.t
    lo, hi = FIT_WINDOW
    win = (tau >= lo * T) & (tau <= hi * T)
    if win.sum() < 4:
        win = (tau > 0) & (tau <= hi * T)
        heuristic = True
    tw, xw = tau[win], traj.x[win]
    if win.sum() >= 3:
        ratio = np.sum((xw - x_lim) ** 2, axis=1) / tw
        gw = xw @ roots.T
        q = np.sum(mult / gw**2, axis=1) * tw
        rate = _fit_limit(tw, ratio, T)
        typeI = _fit_limit(tw, q, T)
    else:
        rate = typeI = float("nan")
    st = frozenset(vanish) | traj.stratum
    return CollapseReport(
        T=float(T),
        x_limit=ChamberPoint(x_lim, st),
        active_walls=tuple(sorted(vanish)),
        fiber_dim=fiber,
        rate_estimate=rate,
        typeI_estimate=typeI,
        top_stratum=len(vanish) == 1,
        limit=limit,
        heuristic_extrapolation=heuristic,
    )


def scale_solution(traj: Trajectory, r: float, allow_antipodal: bool = False) -> Trajectory:
    """The rescaled flow (t, x) -> (r^2 t, r x)."""
    if r == 0:
        raise ValueError("r must be nonzero")
    if r < 0 and not allow_antipodal:
        raise OutsideChamber("r < 0 maps the flow into the antipodal chamber")
    col = traj.collapse
    if col is not None:
        col = replace(col, T=col.T * r * r,
                      x_limit=ChamberPoint(col.x_limit.coords * r, col.x_limit.stratum))
    return replace(traj, t=traj.t * r * r, x=traj.x * r, dxdt=traj.dxdt / r, collapse=col)


def ode_residual(rs: RootSystem, traj: Trajectory) -> float:
    """Max relative mismatch between finite differences of the samples and the field.

    Uses a centered difference on consecutive sample triples; O(h^2) accurate.
    """
    worst = 0.0
    act = traj.active
    roots = rs.positive_roots[act]
    m = np.asarray(rs.multiplicities, dtype=float)[act]
    t, x = traj.t, traj.x
    for j in range(1, len(t) - 1):
        h0, h1 = t[j] - t[j - 1], t[j + 1] - t[j]
        d = ((x[j + 1] - x[j]) * h0**2 + (x[j] - x[j - 1]) * h1**2) / (h0 * h1 * (h0 + h1))
        v = -(m / (roots @ x[j])) @ roots
        if traj.variant == "spherical":
            v = v + traj.n_effective * x[j]
        worst = max(worst, float(np.linalg.norm(d - v) / max(np.linalg.norm(v), 1e-300)))
    return worst
