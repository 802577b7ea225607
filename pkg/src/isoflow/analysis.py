"""Cross-cutting checks: minimal point, singularity classification,
separation monotonicity, Euclidean/spherical correspondence and the
A3 spherical portrait."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Point, Polygon

from .errors import NoConvergence, NotCollapsed
from .parallel import pmap
from .flow import CollapseReport, Trajectory, integrate, mcv_euclidean
from .weyl import (ChamberPoint, RootSystem, build_root_system,
                   canonical_chamber_center, coords_of, subsystem, wall_gaps,
                   weyl_type)

MINIMAL_RESIDUAL = 1e-10
SHOOT_EPS = 1e-4


# ---------------------------------------------------------------- minimal point

@dataclass(frozen=True)
class MinimalPoint:
    p0: np.ndarray
    residual: float
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"p0": [float(v) for v in self.p0], "residual": self.residual,
                "iterations": self.iterations}


def _newton_minimal(rs: RootSystem, y, max_iter=100):
    """Damped Newton on grad of phi(y) = -sum m log(-<Qy, a>) + n |y|^2 / 2.

    phi is strictly convex on the chamber and its gradient is the
    spherical field H(x) + n x written in the root-span basis Q."""
    q = rs.basis
    beta = rs.positive_roots @ q          # roots in basis coordinates
    m = np.asarray(rs.multiplicities, dtype=float)
    n = float(rs.n)

    def phi(y):
        g = beta @ y
        if np.any(g >= 0):
            return math.inf
        return float(-np.sum(m * np.log(-g)) + 0.5 * n * y @ y)

    iterates = [y.copy()]
    for it in range(max_iter):
        g = beta @ y
        grad = -(m / g) @ beta + n * y
        if np.linalg.norm(grad) <= 0.1 * MINIMAL_RESIDUAL:
            return y, it, iterates
        # hess = A^T A and grad = A^T r, so the Newton step is a least-squares
        # solution; this stays accurate when one gap is tiny and hess is
        # dominated by a single rank-one term
        a = np.vstack([beta * (np.sqrt(m) / np.abs(g))[:, None], math.sqrt(n) * np.eye(len(y))])
        r = np.concatenate([np.sqrt(m), math.sqrt(n) * y])
        step = np.linalg.lstsq(a, r, rcond=None)[0]
        # phi is self-concordant (log barrier with weights m >= 1 plus a
        # quadratic), so a full step is safe once the Newton decrement is
        # below 1/4; line search only far from p0, where phi is well resolved
        s = 1.0
        if grad @ step >= 1.0 / 16:
            f0 = phi(y)
            while phi(y - s * step) > f0 - 1e-4 * s * (grad @ step):
                s *= 0.5
        y = y - s * step
        iterates.append(y.copy())
    g = beta @ y
    if np.linalg.norm(-(m / g) @ beta + n * y) <= MINIMAL_RESIDUAL:
        return y, max_iter, iterates
    raise NoConvergence("Newton iteration for the minimal point did not converge",
                        [rs.basis @ v for v in iterates])


def find_minimal_point(rs: RootSystem, start=None, max_iter: int = 100) -> MinimalPoint:
    """Unique unit chamber point where the spherical field vanishes."""
    x = canonical_chamber_center(rs).coords if start is None else coords_of(start)
    y, its, _ = _newton_minimal(rs, rs.basis.T @ x, max_iter)
    p0 = rs.basis @ y
    res = float(np.linalg.norm(mcv_euclidean(rs, p0) + rs.n * p0))
    return MinimalPoint(p0, res, its)


# ---------------------------------------------------------------- classification

def classify_singularity(report: CollapseReport, rs: RootSystem | None = None,
                         rel_tol: float = 0.05) -> dict:
    """Fiber dimension, type-I verdict, rate checks and fiber Weyl type."""
    m = report.fiber_dim
    rate_ok = bool(np.isfinite(report.rate_estimate)
                   and abs(report.rate_estimate - 2 * m) <= rel_tol * 2 * m)
    q_ok = bool(np.isfinite(report.typeI_estimate)
                and abs(report.typeI_estimate - 0.5) <= rel_tol * 0.5)
    # Q (T - t) stays bounded whenever the gaps shrink like sqrt(T - t); its
    # limit is 1/2 only on a top stratum (one vanishing line).
    type_i = (report.top_stratum or report.limit == "origin"
              or bool(np.isfinite(report.typeI_estimate)))
    out = {
        "fiber_dim": m,
        "top_stratum": report.top_stratum,
        "typeI": bool(type_i),
        "rate_estimate": report.rate_estimate,
        "rate_check": rate_ok,
        "typeI_estimate": report.typeI_estimate,
        "typeI_check": q_ok if report.top_stratum else None,
        "limit": report.limit,
    }
    if rs is not None:
        out["fiber_type"] = weyl_type(rs, report.active_walls)
    return out


# ---------------------------------------------------------------- separation

def values_at(traj: Trajectory, times):
    """Samples at the given times, exact where a step landed on them."""
    out = []
    for t in times:
        j = int(np.searchsorted(traj.t, t))
        if j < len(traj.t) and traj.t[j] == t:
            out.append(traj.x[j])
        else:
            out.append(traj.at(t))
    return np.array(out)


@dataclass
class SeparationResult:
    variant: str
    times: np.ndarray
    pairs: list = field(default_factory=list)     # (i, j) index pairs
    distances: list = field(default_factory=list) # arrays of |x_i - x_j| per pair
    verdicts: list = field(default_factory=list)
    limit_gaps: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts)


def separation_check(rs: RootSystem, x0_list, variant: str = "euclidean",
                     n_times: int = 60, window: float | None = None,
                     tol: float = 1e-11, decrease_tol: float = 1e-9,
                     slope_tol: float = 0.01) -> SeparationResult:
    """Pairwise separations along a common time grid.

    Euclidean pairs must never move closer (beyond ``decrease_tol``);
    spherical pairs must have log |x_i - x_j|^2 growing at rate >= 2n - slope_tol.
    The grid covers ``[0, window * min T]`` (window 0.999 for Euclidean, 0.5 for
    spherical by default)."""
    starts = [np.asarray(coords_of(x), dtype=float) for x in x0_list]
    runs = [integrate(rs, x, variant, tol=tol) for x in starts]
    Ts = [r.collapse.T if r.collapse is not None else float(r.t[-1]) for r in runs]
    if window is None:
        window = 0.5 if variant == "spherical" else 0.999
    t_max = min(window * min(Ts), min(float(r.t[-1]) for r in runs))
    times = np.linspace(0.0, t_max, n_times)
    runs = [integrate(rs, x, variant, tol=tol, t_eval=times[1:]) for x in starts]
    times = times[times <= min(float(r.t[-1]) for r in runs)]
    vals = [values_at(r, times) for r in runs]
    n = rs.n
    res = SeparationResult(variant, times)
    for i in range(len(starts)):
        for j in range(i + 1, len(starts)):
            d = np.linalg.norm(vals[i] - vals[j], axis=1)
            res.pairs.append((i, j))
            res.distances.append(d)
            if d[0] == 0.0:
                res.verdicts.append(True)   # identical starts: nothing to separate
                res.limit_gaps.append(0.0)
                continue
            if variant == "spherical":
                slopes = np.diff(np.log(d**2)) / np.diff(times)
                ok = bool(np.all(slopes >= 2 * n - slope_tol))
            else:
                ok = bool(np.all(np.diff(d) >= -decrease_tol))
            res.verdicts.append(ok)
            ci, cj = runs[i].collapse, runs[j].collapse
            if ci is not None and cj is not None:
                res.limit_gaps.append(float(np.linalg.norm(ci.x_limit.coords - cj.x_limit.coords)))
            else:
                res.limit_gaps.append(float("nan"))
    return res


# ---------------------------------------------------------------- correspondence

def correspondence_check(rs: RootSystem, x0, upto: float = 0.9, tol: float = 1e-11) -> dict:
    """Compare the Euclidean flow y with sqrt(1 - 2nt) x(s(t)), s = -log(1 - 2nt)/(2n),
    x the spherical flow; also test T_x = -log(1 - 2n T_y)/(2n)."""
    x0 = np.asarray(coords_of(x0), dtype=float)
    n = rs.n
    euc = integrate(rs, x0, "euclidean", tol=tol)
    if euc.collapse is None:
        raise NotCollapsed("Euclidean run did not collapse")
    Ty = euc.collapse.T
    times = euc.t[(euc.t > 0) & (euc.t <= upto * Ty)]
    s = -np.log1p(-2 * n * times) / (2 * n)
    sph = integrate(rs, x0, "spherical", tol=tol, t_eval=s)
    mapped = np.sqrt(1 - 2 * n * times)[:, None] * values_at(sph, s)
    ys = euc.x[(euc.t > 0) & (euc.t <= upto * Ty)]
    dev = float(np.max(np.linalg.norm(mapped - ys, axis=1))) if len(times) else 0.0
    stationary = euc.collapse.limit == "origin"
    Tx = sph.collapse.T if sph.collapse is not None else math.inf
    if stationary:
        # T_x is infinite in exact arithmetic; a finite numeric T_x only
        # records round-off escaping the unstable fixed point
        rel = None
    elif sph.collapse is None:
        rel = math.inf
    else:
        rel = abs(Tx + math.log1p(-2 * n * Ty) / (2 * n))
    return {"deviation": dev, "T_euclidean": Ty, "T_spherical": Tx,
            "time_relation_residual": rel, "stationary": stationary,
            "samples": int(len(times))}


def spherical_time_bound(rs: RootSystem, x0, p0=None, diameter: float | None = None) -> float:
    """Upper bound (1/n) log(D / |x0 - p0|) on the spherical existence time."""
    if p0 is None:
        p0 = find_minimal_point(rs).p0
    if diameter is None:
        diameter = chamber_diameter(rs)
    d = float(np.linalg.norm(coords_of(x0) - p0))
    return math.log(diameter / d) / rs.n if d > 0 else math.inf


def chamber_vertices(rs: RootSystem) -> np.ndarray:
    """Unit vertices of the spherical chamber simplex; row s is orthogonal to
    every simple root except the s-th."""
    s = rs.positive_roots[list(rs.simple)]
    q = rs.basis
    verts = []
    for i in range(len(s)):
        others = np.delete(s, i, axis=0) @ q
        if len(others):
            _, _, vt = np.linalg.svd(others)
            y = vt[-1]
        else:
            y = np.ones(q.shape[1])
        v = q @ y
        if v @ s[i] > 0:
            v = -v
        verts.append(v / np.linalg.norm(v))
    return np.array(verts)


def chamber_diameter(rs: RootSystem) -> float:
    v = chamber_vertices(rs)
    return float(max(np.linalg.norm(a - b) for a in v for b in v))


# ---------------------------------------------------------------- A3 portrait

def _tangent_angle(v, a, b):
    ta = a - (a @ v) * v
    tb = b - (b @ v) * v
    c = ta @ tb / (np.linalg.norm(ta) * np.linalg.norm(tb))
    return math.acos(max(-1.0, min(1.0, c)))


@dataclass
class A3Portrait:
    rs: RootSystem
    p0: np.ndarray
    vertices: np.ndarray            # rows p1, p2, p3
    vertex_walls: list              # vanishing root indices at each vertex
    angles: tuple
    fiber_types: list
    separatrices: list              # arrays of unit points, p0 end first
    separatrix_ok: list
    region_walls: dict              # region k -> predicted limit wall (root index)
    chart: np.ndarray               # 3 x 2 gnomonic chart basis at p0
    starts: np.ndarray = None
    labels: list = None             # "D1", "D2", "D3" or "l1".. for separatrix hits
    observed: list = None           # observed active walls per start
    T: list = None

    def to_chart(self, x):
        x = np.atleast_2d(x)
        y = x / (x @ self.p0)[:, None]
        return (y - self.p0) @ self.chart

    def match_fraction(self) -> float:
        good = sum(1 for lab, obs in zip(self.labels, self.observed)
                   if lab in self.region_walls and obs == (self.region_walls[lab],))
        return good / len(self.labels)

    def csv_rows(self):
        """(start coords, chart coords, region label, limit wall, T) per sample."""
        uv = self.to_chart(self.starts)
        for x, (u, v), lab, obs, T in zip(self.starts, uv, self.labels, self.observed, self.T):
            yield list(x), (u, v), lab, obs, T


def _region_polygons(pt: A3Portrait):
    sep = [pt.to_chart(s) for s in pt.separatrices]
    polys = {}
    for k in range(3):
        i, j = [a for a in range(3) if a != k]
        # p0 -> p_i along l_i, straight edge p_i -> p_j, back along l_j
        ring = np.vstack([sep[i], sep[j][::-1]])
        polys[f"D{k + 1}"] = Polygon(ring)
    return polys


def a3_portrait(m: int = 1, n_samples: int = 300, seed: int = 0,
                tol: float = 1e-10, classify: bool = True) -> A3Portrait:
    """Spherical portrait of A3 with uniform multiplicity m."""
    rs = build_root_system("A", 3, m)
    mp = find_minimal_point(rs)
    p0 = mp.p0
    verts = chamber_vertices(rs)   # orthogonal to all simple roots but one
    # order: p1, p2 have A2 fibers, p3 the A1xA1 fiber
    walls = []
    for v in verts:
        walls.append(tuple(int(i) for i in np.flatnonzero(np.abs(wall_gaps(rs, v)) < 1e-12)))
    types = [weyl_type(rs, w) for w in walls]
    order = sorted(range(3), key=lambda i: (types[i] != "A2", i))
    verts = verts[order]
    walls = [walls[i] for i in order]
    types = [types[i] for i in order]
    angles = tuple(_tangent_angle(verts[i], *[verts[j] for j in range(3) if j != i])
                   for i in range(3))

    # separatrices: backward shooting from p_i along the fiber's minimal direction
    seps, oks = [], []
    for v, w in zip(verts, walls):
        sub = subsystem(rs, w)
        d = find_minimal_point(sub).p0
        x = v + SHOOT_EPS * d
        x /= np.linalg.norm(x)
        tr = integrate(rs, x, "spherical", backward=True, tol=tol, detect=False)
        path = tr.x[::-1]
        oks.append(bool(np.linalg.norm(path[0] - p0) < 1e-6))
        seps.append(np.vstack([p0, path, v]))

    # the edge p_i p_j lies on the simple wall orthogonal to both vertices
    simple = list(rs.simple)
    region_walls = {}
    for k in range(3):
        i, j = [a for a in range(3) if a != k]
        common = [s for s in simple if s in walls[i] and s in walls[j]]
        region_walls[f"D{k + 1}"] = common[0]

    q = rs.basis
    tang = q - np.outer(p0, p0 @ q)
    u, s, _ = np.linalg.svd(tang, full_matrices=False)
    chart = u[:, :2]
    pt = A3Portrait(rs, p0, verts, walls, angles, types, seps, oks, region_walls, chart)
    if not classify:
        return pt

    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(3), size=n_samples)
    starts = w @ verts
    starts /= np.linalg.norm(starts, axis=1)[:, None]
    polys = _region_polygons(pt)
    labels = []
    for x in starts:
        p = Point(*pt.to_chart(x)[0])
        labels.append(next((k for k, poly in polys.items() if poly.contains(p)), "separatrix"))
    limits = pmap(_spherical_limit, [(rs, x, tol) for x in starts])
    pt.starts, pt.labels = starts, labels
    pt.observed = [w for w, _ in limits]
    pt.T = [T for _, T in limits]
    return pt


def _spherical_limit(args):
    rs, x, tol = args
    tr = integrate(rs, x, "spherical", tol=tol)
    if tr.collapse is None:
        return (), math.nan
    return tr.collapse.active_walls, tr.collapse.T


def random_chamber_points(rs: RootSystem, rng, size: int, concentration: float = 1.0) -> np.ndarray:
    """Unit points of the open chamber: Dirichlet weights on the simplex vertices."""
    w = rng.dirichlet(np.full(rs.rank, concentration), size=size)
    x = w @ chamber_vertices(rs)
    return x / np.linalg.norm(x, axis=1)[:, None]
