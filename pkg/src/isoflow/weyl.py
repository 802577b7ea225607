"""Root systems with multiplicities, Weyl chamber geometry and strata.

All positive roots are unit vectors, one per reflection hyperplane, and are
sign-normalized so that every root is *negative* on the open chamber.  The
chamber of the flow is therefore ``{x : <x, alpha> < 0 for all alpha}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import (
    NonpositiveMultiplicity,
    OutsideChamber,
    UnsupportedFamilyParams,
)

FAMILIES = ("A", "B", "D", "I2")
CRYSTALLOGRAPHIC_G = (2, 3, 4, 6)
STRATUM_RTOL = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RootSystem:
    family: str
    rank: int
    positive_roots: np.ndarray
    multiplicities: tuple
    simple: tuple
    spec: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        """Dimension of the isoparametric submanifold, sum of multiplicities."""
        return int(sum(self.multiplicities))

    ambient_dim_n = n

    @property
    def dim(self) -> int:
        """Number of coordinates (k + 1 for A_k)."""
        return self.positive_roots.shape[1]

    @property
    def n_roots(self) -> int:
        return self.positive_roots.shape[0]

    @property
    def param(self) -> int:
        return self.spec.get("g", self.spec.get("k", self.rank))

    @property
    def crystallographic(self) -> bool:
        return self.family != "I2" or self.param in CRYSTALLOGRAPHIC_G

    @property
    def basis(self) -> np.ndarray:
        """Orthonormal basis (columns) of the span of the roots."""
        return _span_basis(self.positive_roots)

    def spec_json(self) -> str:
        return json.dumps(self.spec, separators=(",", ":"))

    def label(self) -> str:
        if self.family == "I2":
            return f"I2({self.param})"
        return f"{self.family}{self.param}"

    def __repr__(self):
        return f"RootSystem({self.spec_json()}, n={self.n})"


@dataclass(frozen=True, eq=False)
class ChamberPoint:
    coords: np.ndarray
    stratum: frozenset = frozenset()

    @property
    def interior(self) -> bool:
        return not self.stratum

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


class Stratum(NamedTuple):
    vanishing: frozenset
    nonvanishing: tuple
    n_sigma: int
    fiber_dim: int


def _span_basis(vectors) -> np.ndarray:
    u, s, _ = np.linalg.svd(np.asarray(vectors, dtype=float).T, full_matrices=False)
    r = int(np.sum(s > 1e-10 * s[0]))
    q = u[:, :r]
    # deterministic orientation
    for j in range(r):
        i = int(np.argmax(np.abs(q[:, j])))
        if q[i, j] < 0:
            q[:, j] = -q[:, j]
    return q


def coords_of(x) -> np.ndarray:
    if isinstance(x, ChamberPoint):
        return x.coords
    return np.asarray(x, dtype=float)


def _mults(family, k_or_g, multiplicities):
    if isinstance(multiplicities, (int, np.integer)):
        ms = (int(multiplicities),)
    else:
        ms = tuple(int(m) for m in multiplicities)
    if not ms or len(ms) > 2:
        raise UnsupportedFamilyParams("expected one or two multiplicities")
    if any(m <= 0 for m in ms):
        raise NonpositiveMultiplicity(f"multiplicities must be positive, got {ms}")
    if len(ms) == 2:
        if family in ("A", "D"):
            raise UnsupportedFamilyParams(f"{family}_k carries a single multiplicity")
        if family == "I2" and (k_or_g % 2 == 1 or (k_or_g == 6 and ms[0] != ms[1])):
            raise UnsupportedFamilyParams(
                f"I2({k_or_g}) requires a uniform multiplicity")
    return ms


def build_root_system(family: str, k_or_g: int, multiplicities) -> RootSystem:
    """Positive unit roots with multiplicities for A_k, B_k, D_k or I2(g).

    ``multiplicities`` is an int, or a pair (m1, m2) for B_k and even I2(g).
    For B_k, m1 belongs to the roots (e_i +- e_j)/sqrt2 and m2 to e_i; for
    I2(g), m1 belongs to the even-indexed root lines.
    """
    family = str(family).upper()
    if family not in FAMILIES:
        raise UnsupportedFamilyParams(f"unknown family {family!r}")
    k = int(k_or_g)
    ms = _mults(family, k, multiplicities)
    m1 = ms[0]
    m2 = ms[-1]
    s2 = math.sqrt(0.5)
    roots, mult, simple = [], [], []

    if family == "A":
        if k < 1:
            raise UnsupportedFamilyParams("A_k needs k >= 1")
        d = k + 1
        for i, j in combinations(range(d), 2):
            r = np.zeros(d)
            r[i], r[j] = s2, -s2
            if j == i + 1:
                simple.append(len(roots))
            roots.append(r)
            mult.append(m1)
        rank, ref = k, np.arange(d) - k / 2.0
    elif family in ("B", "D"):
        if family == "B" and k < 2:
            raise UnsupportedFamilyParams("B_k needs k >= 2")
        if family == "D" and k < 4:
            raise UnsupportedFamilyParams("D_k needs k >= 4")
        for i, j in combinations(range(k), 2):
            r = np.zeros(k)
            r[i], r[j] = s2, -s2
            if j == i + 1:
                simple.append(len(roots))
            roots.append(r)
            mult.append(m1)
        for i, j in combinations(range(k), 2):
            r = np.zeros(k)
            r[i], r[j] = s2, s2
            if family == "D" and (i, j) == (k - 2, k - 1):
                simple.append(len(roots))
            roots.append(r)
            mult.append(m1)
        if family == "B":
            for i in range(k):
                r = np.zeros(k)
                r[i] = 1.0
                if i == k - 1:
                    simple.append(len(roots))
                roots.append(r)
                mult.append(m2)
        rank, ref = k, -np.arange(k, 0, -1, dtype=float)
    else:
        g = k
        if g < 2:
            raise UnsupportedFamilyParams("I2(g) needs g >= 2")
        for j in range(g):
            phi = j * math.pi / g + math.pi / 2
            roots.append(np.array([math.cos(phi), math.sin(phi)]))
            mult.append(m1 if j % 2 == 0 else m2)
        simple = [0, 1]
        rank = 2
        a = math.pi / (2 * g)
        ref = np.array([math.cos(a), math.sin(a)])

    roots = np.array(roots)
    # negative on the chamber
    flip = roots @ ref > 0
    roots[flip] *= -1.0

    spec = {"family": family}
    spec["g" if family == "I2" else "k"] = k
    if len(ms) == 1:
        spec["m"] = m1
    else:
        spec["m1"], spec["m2"] = ms
    return RootSystem(family, rank, _frozen(roots), tuple(mult), tuple(simple), spec)


def parse_spec(doc) -> RootSystem:
    """Build a RootSystem from a JSON document (str or already-parsed dict)."""
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or "family" not in doc:
        raise UnsupportedFamilyParams("root-system spec needs a 'family' field")
    fam = str(doc["family"]).upper()
    if fam not in FAMILIES:
        raise UnsupportedFamilyParams(f"unknown family {doc['family']!r}; expected one of {FAMILIES}")
    key = "g" if fam == "I2" else "k"
    if key not in doc:
        raise UnsupportedFamilyParams(f"root-system spec for {fam} needs {key!r}")
    allowed = {"family", key, "m", "m1", "m2"}
    extra = set(doc) - allowed
    if extra:
        raise UnsupportedFamilyParams(f"unexpected fields {sorted(extra)}")
    for name in (key, "m", "m1", "m2"):
        if name in doc and (isinstance(doc[name], bool) or not isinstance(doc[name], int)):
            raise UnsupportedFamilyParams(f"field {name!r} must be an integer")
    if "m" in doc and ("m1" in doc or "m2" in doc):
        raise UnsupportedFamilyParams("give either m or (m1, m2)")
    if "m" in doc:
        ms = doc["m"]
    elif "m1" in doc and "m2" in doc:
        ms = (doc["m1"], doc["m2"])
    else:
        raise UnsupportedFamilyParams("missing multiplicity")
    return build_root_system(fam, doc[key], ms)


def subsystem(rs: RootSystem, indices: Sequence[int]) -> RootSystem:
    """The sub-root-system spanned by the given positive roots.

    Used for fibers of focal strata; the ambient coordinates are kept.
    """
    idx = sorted(int(i) for i in indices)
    roots = rs.positive_roots[idx]
    mult = tuple(rs.multiplicities[i] for i in idx)
    simple = tuple(i for i in range(len(idx)) if not _in_cone(roots, i))
    spec = {"family": "sub", "of": rs.spec_json(), "roots": idx}
    return RootSystem("sub", int(np.linalg.matrix_rank(roots)), _frozen(roots),
                      mult, simple, spec)


def _in_cone(roots, i) -> bool:
    others = np.delete(roots, i, axis=0)
    if len(others) == 0:
        return False
    _, res = nnls(others.T, roots[i])
    return res < 1e-9


def simple_roots_by_cone(rs: RootSystem) -> tuple:
    """Indices of the positive roots spanning extreme rays of the root cone."""
    return tuple(i for i in range(rs.n_roots) if not _in_cone(rs.positive_roots, i))


def wall_gaps(rs: RootSystem, x) -> np.ndarray:
    """Inner products <x, alpha_i>, ordered as the positive roots."""
    return rs.positive_roots @ coords_of(x)


def canonical_chamber_center(rs: RootSystem) -> ChamberPoint:
    """Unit point maximizing the smallest distance to the walls.

    Only simple walls can bind (each unit positive root is a nonnegative
    combination of simple roots with coefficient sum >= 1), and the
    inverse Gram matrix of obtuse simple roots is entrywise nonnegative, so
    the optimum solves <x, alpha_s> = -1 for every simple root, rescaled.
    """
    s = rs.positive_roots[list(rs.simple)]
    lam = np.linalg.solve(s @ s.T, np.ones(len(s)))
    x = -lam @ s
    return ChamberPoint(_frozen(x / np.linalg.norm(x)))


def default_tol(x) -> float:
    return STRATUM_RTOL * float(np.linalg.norm(coords_of(x)))


def stratum_of(rs: RootSystem, x, tol: float | None = None) -> Stratum:
    """Vanishing root set of a point of the closed chamber."""
    g = wall_gaps(rs, x)
    if tol is None:
        tol = default_tol(x)
    if np.any(g > tol):
        raise OutsideChamber(f"positive wall gap {g.max():.3e} > tol {tol:.3e}")
    van = frozenset(int(i) for i in np.flatnonzero(np.abs(g) <= tol))
    rest = tuple(i for i in range(rs.n_roots) if i not in van)
    m = sum(rs.multiplicities[i] for i in van)
    return Stratum(van, rest, rs.n - m, m)


def chamber_point(rs: RootSystem, x, tol: float | None = None) -> ChamberPoint:
    x = coords_of(x)
    return ChamberPoint(_frozen(x), stratum_of(rs, x, tol).vanishing)


def reflect(rs: RootSystem, root_index: int, x) -> np.ndarray:
    a = rs.positive_roots[root_index]
    x = coords_of(x)
    return x - 2.0 * (x @ a) * a


def project_to_span(rs: RootSystem, x) -> np.ndarray:
    """Orthogonal projection onto the span of the roots (V for A_k)."""
    q = rs.basis
    return q @ (q.T @ coords_of(x))


def project_to_stratum(rs: RootSystem, x, vanishing) -> np.ndarray:
    """Orthogonal projection onto V(sigma) = {<x, alpha_i> = 0, i in vanishing}."""
    x = coords_of(x)
    if not vanishing:
        return np.array(x, dtype=float)
    a = rs.positive_roots[sorted(vanishing)]
    q = _span_basis(a)
    return x - q @ (q.T @ x)


def weyl_type(rs: RootSystem, indices: Sequence[int]) -> str:
    """Cartan-type name of the reflection subgroup generated by the given roots,
    e.g. 'A2' or 'A1xA1'."""
    idx = sorted(set(int(i) for i in indices))
    if not idx:
        return "trivial"
    roots = rs.positive_roots[idx]
    # components of the non-orthogonality graph
    parent = list(range(len(idx)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in combinations(range(len(idx)), 2):
        if abs(roots[a] @ roots[b]) > 1e-12:
            parent[find(a)] = find(b)
    comps = {}
    for i in range(len(idx)):
        comps.setdefault(find(i), []).append(i)
    names = []
    for members in comps.values():
        # close under reflections to get the full positive system of the component
        sub = _close_lines(roots[members])
        r = int(np.linalg.matrix_rank(sub))
        cnt = len(sub)
        if r == 1:
            names.append("A1")
        elif r == 2:
            names.append({3: "A2", 4: "B2", 6: "G2"}.get(cnt, f"I2({cnt})"))
        elif cnt == r * (r + 1) // 2:
            names.append(f"A{r}")
        elif cnt == r * r:
            names.append(f"B{r}")
        elif cnt == r * (r - 1):
            names.append(f"D{r}")
        else:
            names.append(f"?{r}:{cnt}")
    return "x".join(sorted(names))


def _close_lines(roots) -> np.ndarray:
    lines = [np.asarray(r, dtype=float) for r in roots]
    changed = True
    while changed:
        changed = False
        for a in list(lines):
            for b in list(lines):
                c = b - 2.0 * (b @ a) * a
                if not any(abs(abs(c @ l) - 1.0) < 1e-9 for l in lines):
                    lines.append(c)
                    changed = True
    return np.array(lines)
