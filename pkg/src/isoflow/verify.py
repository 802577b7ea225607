"""Desk-scale property suites for one root system, used by ``isoflow verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import (classify_singularity, correspondence_check,
                       find_minimal_point, random_chamber_points,
                       separation_check, values_at)
from .errors import UnsupportedFamily
from .flow import integrate, scale_solution
from .invariants import (eval_invariants, exact_recursion, exact_trajectory,
                         oracle_eta, recover_point)
from .weyl import RootSystem


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<34s} {self.value:.3e}  (limit {self.limit:.1e})"


def _rel(a, b, scale):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / scale))


def run_suites(rs: RootSystem, seed: int = 0, n_starts: int = 5, tol: float = 1e-10) -> list:
    rng = np.random.default_rng(seed)
    starts = random_chamber_points(rs, rng, n_starts, concentration=2.0)
    runs = [integrate(rs, x, tol=tol) for x in starts]
    out = []

    worst = max(float(r.radial_residual.max()) for r in runs)
    out.append(Check("radial identity", worst <= 1e-7, worst, 1e-7))

    mp = find_minimal_point(rs)
    out.append(Check("minimal point residual", mp.residual <= 1e-10, mp.residual, 1e-10))
    tr = integrate(rs, mp.p0, tol=tol)
    keep = tr.norm_sq >= 1e-2
    u = tr.x[keep] / np.sqrt(tr.norm_sq[keep])[:, None]
    drift = float(np.max(np.linalg.norm(u - mp.p0, axis=1)))
    out.append(Check("homothetic drift from p0", drift <= 1e-8, drift, 1e-8))
    dT = abs(tr.collapse.T - 1 / (2 * rs.n))
    out.append(Check("homothetic collapse time", dT <= 1e-6, dT, 1e-6))

    try:
        exact_recursion(rs)
        supported = True
    except UnsupportedFamily:
        supported = False
    if supported:
        rec = exact_recursion(rs)
        err = 0.0
        for x in starts:
            eta = np.array([float(v) for v in rec.eta(eval_invariants(rs, x))])
            orc = oracle_eta(rs, x)
            err = max(err, _rel(eta, orc, np.maximum(np.abs(orc), 1.0)))
        out.append(Check("recursion vs derivative oracle", err <= 1e-6, err, 1e-6))

        # unit starts: |x0|^deg = 1 sets the absolute floor of the relative error
        err = rt = 0.0
        for x, run in zip(starts, runs):
            et = exact_trajectory(rs, x)
            T = run.collapse.T
            for t, xt in zip(run.t, run.x):
                if t > 0.9 * T:
                    break
                ex = et(t)
                num = np.array(eval_invariants(rs, xt))
                err = max(err, _rel(num, ex, np.maximum(np.abs(ex), 1.0)))
            back = recover_point(rs, eval_invariants(rs, x)).coords
            rt = max(rt, float(np.max(np.abs(back - x))))
        out.append(Check("exact vs numeric invariants", err <= 1e-6, err, 1e-6))
        out.append(Check("recovery round trip", rt <= 1e-9, rt, 1e-9))

    bad = 0
    for r in runs:
        c = classify_singularity(r.collapse, rs)
        if not c["rate_check"] or (c["top_stratum"] and not c["typeI_check"]):
            bad += 1
    out.append(Check("singularity rates", bad == 0, float(bad), 0.0))

    sep = separation_check(rs, starts[:3], "euclidean")
    worst = -min(float(np.min(np.diff(d))) for d in sep.distances)
    out.append(Check("euclidean separation monotone", sep.passed, max(worst, 0.0), 1e-9))

    cc = correspondence_check(rs, starts[0])
    out.append(Check("euclidean/spherical correspondence", cc["deviation"] <= 1e-5,
                     cc["deviation"], 1e-5))
    rel = cc["time_relation_residual"]
    rel = math.inf if rel is None else rel
    out.append(Check("collapse time relation", rel <= 1e-4, rel, 1e-4))

    base = runs[0]
    err = 0.0
    for r in (0.5, 2.0):
        scaled = scale_solution(base, r)
        sel = (scaled.t > 0) & (scaled.t <= 0.9 * scaled.collapse.T)
        direct = integrate(rs, r * starts[0], tol=tol, t_eval=scaled.t[sel])
        err = max(err, float(np.max(np.abs(values_at(direct, scaled.t[sel]) - scaled.x[sel]))) / r)
    out.append(Check("scaling lemma", err <= 1e-6, err, 1e-6))

    if rs.family == "I2" and rs.param in (3, 4, 6):
        from .rank2 import rank2_solution, theta_of_t
        m1, m2 = rs.multiplicities[0], rs.multiplicities[1]
        err = terr = 0.0
        for x, run in zip(starts, runs):
            sol = rank2_solution(rs.param, m1, m2, math.atan2(x[1], x[0]))
            for t, xt in zip(run.t, run.x):
                if t > 0.95 * sol.T:
                    break
                th, _ = theta_of_t(sol, t)
                err = max(err, abs(th - math.atan2(xt[1], xt[0])))
            terr = max(terr, abs(run.collapse.T - sol.T) / sol.T)
        out.append(Check("rank-2 angle formula", err <= 1e-6, err, 1e-6))
        out.append(Check("rank-2 maximal time", terr <= 1e-4, terr, 1e-4))
    return out
