"""Exact flow in W-invariant polynomial coordinates.

Coordinates per family:

* A_k: elementary symmetric functions sigma_1..sigma_{k+1} of x in R^{k+1};
* B_k: s_1..s_k, elementary symmetric functions of x_i^2;
* D_k: s_1..s_{k-1} and the product x_1 ... x_k (a signed square root of s_k);
* I2(g): |x|^2 and Re((x_1 + i x_2)^g).

In every case the flow is triangular and linear, ``y_r' = c_r * y_src(r)``
(with ``y_src = 1`` for the lowest coordinates), so the Euclidean solution
is polynomial in t and the spherical one a sum of exponential-polynomials.
Coefficients are kept as exact rationals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import MultipleRootAtBoundary, NotInImage, UnsupportedFamily
from .flow import is_minimal_direction
from .weyl import (
    ChamberPoint,
    RootSystem,
    coords_of,
    project_to_span,
    project_to_stratum,
    stratum_of,
    wall_gaps,
)

ONE = -1  # source index standing for the constant polynomial 1
EXACT_FAMILIES = ("A", "B", "D", "I2")
IMAG_RTOL = 1e-6
ROOT_GAP_RTOL = 1e-8
LIMIT_STRATUM_RTOL = 1e-6


# --------------------------------------------------------------------------
# invariant evaluation

def _elementary(values):
    e = [values[0] * 0 + 1]
    for v in values:
        e = e + [e[-1] * 0]
        for j in range(len(e) - 1, 0, -1):
            e[j] = e[j] + e[j - 1] * v
    return e[1:]


def _re_power(x1, x2, g):
    total = x1 * 0
    for j in range(0, g + 1, 2):
        term = comb(g, j) * x1 ** (g - j) * x2**j
        total = total + (term if (j // 2) % 2 == 0 else -term)
    return total


def eval_invariants(rs: RootSystem, x, exact: bool = False) -> list:
    """Invariant coordinates of x; ``exact=True`` returns Fractions of the
    binary values of x."""
    x = coords_of(x)
    vals = [Fraction(float(v)) for v in x] if exact else [float(v) for v in x]
    fam = rs.family
    if fam == "A":
        return _elementary(vals)
    if fam == "B":
        return _elementary([v * v for v in vals])
    if fam == "D":
        s = _elementary([v * v for v in vals])[:-1]
        prod = vals[0]
        for v in vals[1:]:
            prod = prod * v
        return s + [prod]
    if fam == "I2":
        return [vals[0] ** 2 + vals[1] ** 2, _re_power(vals[0], vals[1], rs.param)]
    raise UnsupportedFamily(f"no invariant coordinates for family {fam!r}")


def invariant_degrees(rs: RootSystem) -> tuple:
    k = rs.param
    if rs.family == "A":
        return tuple(range(1, k + 2))
    if rs.family == "B":
        return tuple(2 * j for j in range(1, k + 1))
    if rs.family == "D":
        return tuple(2 * j for j in range(1, k)) + (k,)
    if rs.family == "I2":
        return (2, k)
    raise UnsupportedFamily(rs.family)


# --------------------------------------------------------------------------
# recursion

@dataclass(frozen=True)
class Recursion:
    """``y_r' = coeffs[r] * y_{sources[r]}``; source ONE is the constant 1."""
    family: str
    degrees: tuple
    coeffs: tuple
    sources: tuple

    def eta(self, y) -> list:
        out = []
        for c, s in zip(self.coeffs, self.sources):
            out.append(c * (1 if s == ONE else y[s]))
        return out


def exact_recursion(rs: RootSystem) -> Recursion:
    fam, k = rs.family, rs.param
    n = rs.n
    if fam == "A":
        m = rs.multiplicities[0]
        coeffs, sources = [], []
        for r in range(1, k + 2):
            c = Fraction(m * (k - r + 3) * (k - r + 2), 2)
            if r == 1:
                coeffs.append(Fraction(0))
                sources.append(ONE)
            else:
                coeffs.append(c)
                sources.append(ONE if r == 2 else r - 3)
    elif fam in ("B", "D"):
        if fam == "B":
            m1, m2 = _pair(rs)
        else:
            m1, m2 = rs.multiplicities[0], 0
        coeffs, sources = [], []
        top = k if fam == "B" else k - 1
        for j in range(1, top + 1):
            coeffs.append(Fraction(-2 * (k - j + 1) * (m2 + m1 * (k - j))))
            sources.append(ONE if j == 1 else j - 2)
        if fam == "D":
            coeffs.append(Fraction(0))
            sources.append(ONE)
    elif fam == "I2":
        g = k
        m1, m2 = _pair(rs)
        if g in (3, 6) and m1 == m2:
            c2 = Fraction(0)
        elif g == 4:
            c2 = Fraction(-8 * (m2 - m1))
        else:
            raise UnsupportedFamily(f"no closed recursion for I2({g}) with {rs.spec_json()}")
        coeffs, sources = [Fraction(-2 * n), c2], [ONE, 0]
    else:
        raise UnsupportedFamily(fam)
    return Recursion(fam, invariant_degrees(rs), tuple(coeffs), tuple(sources))


def _pair(rs):
    """(m1, m2): B_k long/short roots, or even/odd root lines of I2(g)."""
    if rs.family == "B":
        return rs.multiplicities[0], rs.multiplicities[-1]
    return rs.multiplicities[0], rs.multiplicities[1]


def oracle_eta(rs: RootSystem, x, h: float = 1e-5) -> np.ndarray:
    """-F_r(x) = -sum_a m_a <grad P_r(x), a> / <x, a> with central-difference
    gradients; independent of the closed recursions."""
    x = np.asarray(coords_of(x), dtype=float)
    g = wall_gaps(rs, x)
    m = np.asarray(rs.multiplicities, dtype=float)
    basis = np.eye(len(x))
    k = len(eval_invariants(rs, x))
    grads = np.zeros((k, len(x)))
    for i, e in enumerate(basis):
        fp = eval_invariants(rs, x + h * e)
        fm = eval_invariants(rs, x - h * e)
        grads[:, i] = (np.array(fp) - np.array(fm)) / (2 * h)
    return -(grads @ rs.positive_roots.T) @ (m / g)


# --------------------------------------------------------------------------
# polynomial helpers (ascending coefficient lists)

def _padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _pscale(p, c):
    return [c * a for a in p]


def _pint(p):
    return [Fraction(0)] + [a / (i + 1) for i, a in enumerate(p)]


def _pder(p):
    return [a * i for i, a in enumerate(p)][1:]


def _peval(p, t):
    acc = 0 * t
    for a in reversed(p):
        acc = acc * t + a
    return acc


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


# --------------------------------------------------------------------------
# trajectories

@dataclass(frozen=True, eq=False)
class InvariantTrajectory:
    rs: RootSystem
    recursion: Recursion
    initial: tuple
    spherical: bool
    # euclidean: one ascending t-polynomial per coordinate
    # spherical: one dict {j: polynomial} per coordinate, meaning sum_j e^{j n t} poly_j(t)
    terms: tuple

    @property
    def family(self) -> str:
        return self.rs.family

    @property
    def degrees(self) -> tuple:
        return self.recursion.degrees

    def exact_at(self, t) -> list:
        if self.spherical:
            raise ValueError("exponential terms cannot be evaluated exactly")
        t = Fraction(t)
        return [_peval(p, t) for p in self.terms]

    def __call__(self, t) -> np.ndarray:
        t = float(t)
        if not self.spherical:
            return np.array([float(_peval([float(a) for a in p], t)) for p in self.terms])
        n = self.rs.n
        out = []
        for comp in self.terms:
            out.append(sum(math.exp(j * n * t) * _peval([float(a) for a in p], t)
                           for j, p in comp.items()))
        return np.array(out)

    def t_degree(self, r: int) -> int:
        if self.spherical:
            return max(len(_trim(p)) - 1 for p in self.terms[r].values())
        return len(_trim(self.terms[r])) - 1

    def c1(self, r: int):
        """Constant coefficient of the e^{s n t} term of a spherical coordinate."""
        s = self.degrees[r]
        return self.terms[r].get(s, [Fraction(0)])[0]

    def h(self, r: int) -> list:
        return list(self.terms[r].get(0, [Fraction(0)]))

    def to_dict(self) -> dict:
        def enc(a):
            if isinstance(a, Fraction):
                return f"{a.numerator}/{a.denominator}"
            return repr(float(a))

        coords = []
        for r, s in enumerate(self.degrees):
            if self.spherical:
                comp = self.terms[r]
                coords.append({
                    "s": s,
                    "c1": enc(self.c1(r)),
                    "h": [enc(a) for a in self.h(r)],
                    "terms": {str(j): [enc(a) for a in p] for j, p in sorted(comp.items())},
                })
            else:
                coords.append([enc(a) for a in self.terms[r]])
        return {
            "family": self.rs.family,
            "spec": self.rs.spec,
            "n": self.rs.n,
            "spherical": self.spherical,
            "degrees": list(self.degrees),
            "initial": [enc(a) for a in self.initial],
            "coefficients": coords,
        }


def exact_trajectory(rs: RootSystem, x0, spherical: bool = False) -> InvariantTrajectory:
    """Closed-form invariant coordinates along the Euclidean or spherical flow."""
    rec = exact_recursion(rs)
    y0 = eval_invariants(rs, x0, exact=True)
    if not spherical:
        polys = []
        for r, (c, src) in enumerate(zip(rec.coeffs, rec.sources)):
            base = [Fraction(1)] if src == ONE else polys[src]
            p = _padd([y0[r]], _pscale(_pint(base), c))
            polys.append(_trim(p))
        return InvariantTrajectory(rs, rec, tuple(y0), False, tuple(polys))

    n = rs.n
    comps = []
    for r, (c, src) in enumerate(zip(rec.coeffs, rec.sources)):
        s = rec.degrees[r]
        forcing = {0: [Fraction(1)]} if src == ONE else comps[src]
        comp = {}
        for j, p in forcing.items():
            cp = _pscale(p, c)
            if all(a == 0 for a in cp):
                continue
            if j == s:
                q = _pint(cp)
            else:
                lam = Fraction((j - s) * n)
                q, d, sgn = [Fraction(0)], cp, 1
                power = lam
                while any(a != 0 for a in d):
                    q = _padd(q, _pscale(d, Fraction(sgn) / power))
                    d = _pder(d) or [Fraction(0)]
                    sgn, power = -sgn, power * lam
            comp[j] = _padd(comp.get(j, [Fraction(0)]), q)
        const = y0[r] - sum(p[0] for p in comp.values())
        comp[s] = _padd(comp.get(s, [Fraction(0)]), [const])
        comps.append({j: _trim(p) for j, p in comp.items()})
    return InvariantTrajectory(rs, rec, tuple(y0), True, tuple(comps))


# --------------------------------------------------------------------------
# inversion

def _polish(coeffs_desc, z, iters=3):
    p = np.poly1d(coeffs_desc)
    dp = p.deriv()
    for _ in range(iters):
        d = dp(z)
        if d == 0:
            break
        z_new = z - p(z) / d
        if not np.isfinite(z_new) or abs(p(z_new)) > abs(p(z)):
            break
        z = z_new
    return z


def _real_roots(coeffs_desc, scale):
    roots = np.roots(coeffs_desc) if len(coeffs_desc) > 1 else np.array([])
    if len(roots) and np.max(np.abs(roots.imag)) > IMAG_RTOL * max(scale, 1e-300):
        raise NotInImage(f"complex roots (imag {np.max(np.abs(roots.imag)):.3e})")
    r = np.sort(roots.real)
    return np.array([_polish(coeffs_desc, z) for z in r])


def _alt_desc(y):
    """Descending coefficients of prod (z - root) given elementary symmetric y."""
    return [1.0] + [(-1) ** (i + 1) * float(v) for i, v in enumerate(y)]


def recover_point(rs: RootSystem, coords, tol: float | None = None,
                  strict: bool = False) -> ChamberPoint:
    """Chamber point with the given invariant coordinates (sorted representative).

    The returned ChamberPoint carries its stratum; a boundary point is a
    valid answer with its vanishing walls listed, unless ``strict`` is set,
    in which case MultipleRootAtBoundary is raised carrying the point.
    """
    y = [float(v) for v in coords]
    fam = rs.family
    if fam == "A":
        scale = math.sqrt(abs(2 * y[1])) if len(y) > 1 else abs(y[0])
        x = _real_roots(_alt_desc(y), scale)
        x = project_to_span(rs, x)
    elif fam in ("B", "D"):
        k = rs.param
        s = y[:k] if fam == "B" else y[: k - 1] + [y[-1] ** 2]
        scale = abs(s[0])
        z = _real_roots(_alt_desc(s), scale)[::-1]
        if z[-1] < -IMAG_RTOL * max(scale, 1e-300):
            raise NotInImage(f"negative square {z[-1]:.3e}")
        z = np.clip(z, 0.0, None)
        x = -np.sqrt(z)
        if fam == "D":
            sgn = math.copysign(1.0, y[-1]) * (-1) ** (k - 1)
            x[-1] = 0.0 if y[-1] == 0 else sgn * math.sqrt(z[-1])
    elif fam == "I2":
        g = rs.param
        r = math.sqrt(max(y[0], 0.0))
        if r == 0:
            x = np.zeros(2)
        else:
            c = y[1] / r**g
            if abs(c) > 1 + 1e-9:
                raise NotInImage(f"|P2| / r^g = {abs(c)!r} > 1")
            th = math.acos(min(1.0, max(-1.0, c))) / g
            x = r * np.array([math.cos(th), math.sin(th)])
    else:
        raise UnsupportedFamily(fam)
    if tol is None:
        tol = LIMIT_STRATUM_RTOL * float(np.linalg.norm(x))
    try:
        st = stratum_of(rs, x, tol)
    except Exception as exc:
        raise NotInImage(str(exc)) from exc
    pt = ChamberPoint(x, st.vanishing)
    if strict and st.vanishing:
        raise MultipleRootAtBoundary(f"point on walls {sorted(st.vanishing)}", pt)
    return pt


# --------------------------------------------------------------------------
# collapse time

def _sturm_count(p_desc, lo=None, hi=None) -> int:
    """Distinct real roots of an exact polynomial in (lo, hi]; None = infinity."""
    seq = [list(p_desc)]
    d = len(p_desc) - 1
    seq.append([a * (d - i) for i, a in enumerate(p_desc[:-1])])
    while len(seq[-1]) > 1 or (len(seq[-1]) == 1 and seq[-1][0] == 0):
        a, b = seq[-2], seq[-1]
        if all(c == 0 for c in b):
            seq.pop()
            break
        r = list(a)
        while len(r) >= len(b) and any(c != 0 for c in r):
            f = r[0] / b[0]
            for i in range(len(b)):
                r[i] -= f * b[i]
            r.pop(0)
        while r and r[0] == 0:
            r.pop(0)
        if not r:
            break
        seq.append([-c for c in r])

    def changes(at):
        signs = []
        for q in seq:
            if at is None:
                v = q[0]
            elif at == "-inf":
                v = q[0] * (-1) ** (len(q) - 1)
            else:
                v = 0
                for c in q:
                    v = v * at + c
            if v != 0:
                signs.append(v > 0)
        return sum(1 for u, w in zip(signs, signs[1:]) if u != w)

    return changes("-inf" if lo is None else lo) - changes(hi)


def _recovery_poly(rs, vals):
    fam = rs.family
    if fam == "A":
        return [Fraction(1)] + [(-1) ** (i + 1) * v for i, v in enumerate(vals)]
    k = rs.param
    s = vals[:k] if fam == "B" else vals[: k - 1] + [vals[-1] ** 2]
    return [Fraction(1)] + [(-1) ** (i + 1) * v for i, v in enumerate(s)]


def _inside(rs, traj: InvariantTrajectory, t: Fraction) -> bool:
    p = _recovery_poly(rs, traj.exact_at(t))
    deg = len(p) - 1
    if rs.family == "B":
        if p[-1] == 0:
            return False
        return _sturm_count(p, Fraction(0), None) == deg
    return _sturm_count(p) == deg


def exact_collapse_time(rs: RootSystem, x0, grid: int = 64, bits: int = 64):
    """Maximal time T and limit point of the Euclidean flow from x0.

    Rank-2 families use the closed form; A/B/D bisect on t for the first loss
    of k distinct real (and, for B, positive) roots of the recovery
    polynomial, decided exactly with Sturm sequences.
    """
    x0 = coords_of(x0)
    if is_minimal_direction(rs, x0):
        r0 = float(np.linalg.norm(x0))
        return r0 * r0 / (2 * rs.n), ChamberPoint(np.zeros_like(x0), frozenset(range(rs.n_roots)))
    if rs.family == "I2":
        from .rank2 import collapse_from_point
        return collapse_from_point(rs, x0)
    traj = exact_trajectory(rs, x0)
    n = rs.n
    if rs.family == "A":
        T0 = -traj.initial[1] / n           # |x|^2 = -2 sigma_2
    else:
        T0 = traj.initial[0] / (2 * n)       # |x|^2 = s_1
    lo = Fraction(0)
    hi = T0
    for j in range(1, grid + 1):
        t = T0 * j / grid
        if not _inside(rs, traj, t):
            hi = t
            break
        lo = t
    for _ in range(bits):
        mid = (lo + hi) / 2
        if _inside(rs, traj, mid):
            lo = mid
        else:
            hi = mid
    T = float((lo + hi) / 2)
    x0n = float(np.linalg.norm(x0))
    if hi == T0 and float(T0 - lo) <= 1e-12 * float(T0):
        return T, ChamberPoint(np.zeros_like(x0), frozenset(range(rs.n_roots)))
    try:
        pt = recover_point(rs, [float(v) for v in traj.exact_at(lo)])
    except NotInImage:
        pt = recover_point(rs, [float(v) for v in traj.exact_at(lo)],
                           tol=1e-4 * x0n)
    x = pt.coords
    if float(np.linalg.norm(x)) <= 1e-6 * x0n:
        return T, ChamberPoint(np.zeros_like(x0), frozenset(range(rs.n_roots)))
    g = wall_gaps(rs, x)
    van = frozenset(int(i) for i in np.flatnonzero(np.abs(g) <= LIMIT_STRATUM_RTOL * np.linalg.norm(x)))
    if not van:
        van = frozenset([int(np.argmin(np.abs(g)))])
    return T, ChamberPoint(project_to_stratum(rs, x, van), van)
