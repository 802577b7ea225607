"""Closed-form rank-2 flows (dihedral Weyl groups, g = 3, 4, 6).

Points are written ``r e^{i theta}`` with the chamber the sector
``0 < theta < pi/g``.  For g = 4, m1 is the multiplicity of the wall
``theta = 0`` and m2 that of ``theta = pi/4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, UnsupportedG
from .weyl import ChamberPoint, RootSystem, build_root_system, coords_of

SUPPORTED_G = (3, 4, 6)
CLAMP_TOL = 1e-12


def _check_g(g):
    if g not in SUPPORTED_G:
        raise UnsupportedG(f"closed forms exist for g in {SUPPORTED_G}, got {g}")


def rank2_n(g: int, m1: int, m2: int | None = None) -> int:
    if g == 4:
        return 2 * (m1 + (m1 if m2 is None else m2))
    return g * m1


def minimal_angle(g: int, m1: int = 1, m2: int | None = None) -> float:
    """Polar angle of the minimal (stationary) direction in the chamber sector."""
    _check_g(g)
    if g in (3, 6):
        return math.pi / (2 * g)
    m2 = m1 if m2 is None else m2
    return 0.25 * math.acos((m2 - m1) / (m2 + m1))


@dataclass(frozen=True)
class Rank2Solution:
    g: int
    m1: int
    m2: int
    theta0: float
    n: int
    T: float
    branch: str   # "toward_0", "stationary" or "toward_pi/g"

    @property
    def theta_g(self) -> float:
        return minimal_angle(self.g, self.m1, self.m2)

    @property
    def limit_angle(self) -> float:
        if self.branch == "toward_0":
            return 0.0
        if self.branch == "toward_pi/g":
            return math.pi / self.g
        return self.theta_g


def rank2_solution(g: int, m1: int, m2: int | None, theta0: float) -> Rank2Solution:
    _check_g(g)
    m2 = m1 if m2 is None else m2
    if g in (3, 6) and m1 != m2:
        raise UnsupportedG(f"g={g} needs equal multiplicities")
    if not 0.0 < theta0 < math.pi / g:
        raise OutOfDomain(f"theta0={theta0} not in (0, pi/{g})")
    n = rank2_n(g, m1, m2)
    tg = minimal_angle(g, m1, m2)
    if theta0 == tg:
        branch = "stationary"
    elif theta0 < tg:
        branch = "toward_0"
    else:
        branch = "toward_pi/g"
    sol = Rank2Solution(g, m1, m2, float(theta0), n, 0.0, branch)
    return Rank2Solution(g, m1, m2, float(theta0), n, maximal_time(sol), branch)


def maximal_time(sol: Rank2Solution) -> float:
    """Maximal existence time of the flow from the unit point e^{i theta0}."""
    g, n, th = sol.g, sol.n, sol.theta0
    if sol.branch == "stationary":
        return 1.0 / (2 * n)
    if g in (3, 6):
        return (1.0 - abs(math.cos(g * th)) ** (2.0 / g)) / (2 * n)
    m1, m2 = sol.m1, sol.m2
    c = (m2 - m1) / (m2 + m1)
    if sol.branch == "toward_0":
        u = (m1 + m2) / (2 * m1) * (math.cos(4 * th) - c)
    else:
        u = (m1 + m2) / (2 * m2) * (-math.cos(4 * th) + c)
    return (1.0 - math.sqrt(max(u, 0.0))) / (2 * n)


def theta_of_t(sol: Rank2Solution, t: float):
    """(theta(t), r(t)) along the Euclidean flow from e^{i theta0}."""
    if not 0.0 <= t <= sol.T:
        raise OutOfDomain(f"t={t} outside [0, T={sol.T}]")
    g, n = sol.g, sol.n
    y1 = 1.0 - 2 * n * t
    r = math.sqrt(max(y1, 0.0))
    if sol.branch == "stationary":
        return sol.theta0, r
    if g in (3, 6):
        y2 = math.cos(g * sol.theta0)
    else:
        y2 = math.cos(4 * sol.theta0) - 8 * (sol.m2 - sol.m1) * (t - n * t * t)
    arg = y2 / y1 ** (g / 2)
    if abs(arg) > 1.0 + CLAMP_TOL:
        raise OutOfDomain(f"arccos argument {arg!r} beyond [-1, 1]")
    arg = min(1.0, max(-1.0, arg))
    return math.acos(arg) / g, r


def rank2_multiplicities(rs: RootSystem):
    return rs.multiplicities[0], rs.multiplicities[1]


def collapse_from_point(rs: RootSystem, x0):
    """(T, x_limit) for an arbitrary interior start, via the scaling lemma."""
    x0 = np.asarray(coords_of(x0), dtype=float)
    r0 = float(np.linalg.norm(x0))
    th = math.atan2(x0[1], x0[0])
    m1, m2 = rank2_multiplicities(rs)
    sol = rank2_solution(rs.param, m1, m2, th)
    T = sol.T * r0 * r0
    if sol.branch == "stationary":
        return T, ChamberPoint(np.zeros(2), frozenset(range(rs.n_roots)))
    rT = r0 * math.sqrt(max(1.0 - 2 * sol.n * sol.T, 0.0))
    a = sol.limit_angle
    wall = 0 if sol.branch == "toward_0" else 1
    return T, ChamberPoint(rT * np.array([math.cos(a), math.sin(a)]), frozenset([wall]))


def spherical_phase_portrait(g: int, m1: int = 1, m2: int | None = None,
                             starts_per_arc: int = 3, tol: float = 1e-10) -> dict:
    """Stationary point and the two spherical orbits of the unit arc, with
    sampled numeric flow lines (theta against time)."""
    from .flow import integrate

    _check_g(g)
    m2 = m1 if m2 is None else m2
    rs = build_root_system("I2", g, m1 if m1 == m2 else (m1, m2))
    tg = minimal_angle(g, m1, m2)
    lines = []
    for lo, hi in ((0.0, tg), (tg, math.pi / g)):
        for j in range(1, starts_per_arc + 1):
            th0 = lo + (hi - lo) * j / (starts_per_arc + 1)
            x0 = np.array([math.cos(th0), math.sin(th0)])
            tr = integrate(rs, x0, "spherical", tol=tol)
            th = np.arctan2(tr.x[:, 1], tr.x[:, 0])
            end = float(tr.collapse.x_limit.coords @ [0, 1]) if tr.collapse else float("nan")
            lines.append({
                "theta0": th0,
                "t": tr.t.tolist(),
                "theta": th.tolist(),
                "T": tr.collapse.T if tr.collapse else None,
                "limit_theta": (0.0 if abs(end) < 1e-6 else math.pi / g) if tr.collapse else None,
            })
    return {
        "g": g, "m1": m1, "m2": m2, "n": rs.n,
        "p0": [math.cos(tg), math.sin(tg)],
        "theta_g": tg,
        "orbits": [
            {"arc": [0.0, tg], "endpoint": 0.0},
            {"arc": [tg, math.pi / g], "endpoint": math.pi / g},
        ],
        "flow_lines": lines,
    }
