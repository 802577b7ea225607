import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoflow.analysis import (a3_portrait, chamber_diameter, chamber_vertices,
                              classify_singularity, correspondence_check,
                              find_minimal_point, random_chamber_points,
                              separation_check, spherical_time_bound)
from isoflow.flow import integrate, mcv_euclidean
from isoflow.weyl import build_root_system, project_to_stratum, wall_gaps

from conftest import SMALL_SYSTEMS, starts


def polar(x):
    return math.atan2(x[1], x[0])


@pytest.mark.parametrize("g", [3, 6])
def test_minimal_point_dihedral(g):
    mp = find_minimal_point(build_root_system("I2", g, 1))
    assert abs(polar(mp.p0) - math.pi / (2 * g)) < 1e-10
    assert mp.residual <= 1e-10


@pytest.mark.parametrize("m1,m2", [(1, 1), (1, 2), (1, 3), (2, 2), (3, 1)])
def test_minimal_point_g4(m1, m2):
    mp = find_minimal_point(build_root_system("I2", 4, (m1, m2)))
    assert abs(math.cos(4 * polar(mp.p0)) - (m2 - m1) / (m2 + m1)) < 1e-10


def test_minimal_point_a3_m2_is_homothetic():
    rs = build_root_system("A", 3, 2)
    mp = find_minimal_point(rs)
    assert mp.residual < 1e-10
    assert np.all(wall_gaps(rs, mp.p0) < 0)
    tr = integrate(rs, mp.p0)
    keep = tr.norm_sq >= 1e-2
    u = tr.x[keep] / np.sqrt(tr.norm_sq[keep])[:, None]
    assert np.max(np.linalg.norm(u - mp.p0, axis=1)) <= 1e-8
    assert tr.collapse.limit == "origin"


def test_minimal_point_unique_from_random_starts(small_rs):
    ref = find_minimal_point(small_rs).p0
    rng = np.random.default_rng(5)
    for x in random_chamber_points(small_rs, rng, 100, concentration=0.5):
        p = find_minimal_point(small_rs, start=x).p0
        assert np.linalg.norm(p - ref) <= 1e-8


def test_classify_minimal_collapse():
    rs = build_root_system("B", 3, (1, 2))
    rep = integrate(rs, find_minimal_point(rs).p0).collapse
    c = classify_singularity(rep, rs)
    assert c["limit"] == "origin" and c["fiber_dim"] == rs.n
    assert c["typeI"]
    assert np.all(rep.x_limit.coords == 0.0)


@pytest.mark.parametrize("m1,m2", [(1, 1), (2, 3)])
def test_classify_generic_b2(m1, m2):
    rs = build_root_system("B", 2, (m1, m2))
    for x in starts(rs, 5, 13):
        rep = integrate(rs, x).collapse
        c = classify_singularity(rep, rs)
        (i,) = rep.active_walls
        assert c["fiber_dim"] == rs.multiplicities[i]
        assert c["top_stratum"] and c["typeI"]
        assert c["rate_check"] and c["typeI_check"]
        assert c["fiber_type"] == "A1"


@pytest.fixture(scope="module")
def a3_m2():
    return a3_portrait(m=2, n_samples=40, seed=1)


def test_a3_special_curve_collapse(a3_m2):
    rs = a3_m2.rs
    sep = a3_m2.separatrices[2]
    assert a3_m2.fiber_types[2] == "A1xA1"
    # a point on the separatrix toward p3, well away from p0
    x = sep[int(0.8 * len(sep))]
    rep = integrate(rs, x).collapse
    c = classify_singularity(rep, rs)
    assert set(rep.active_walls) == set(a3_m2.vertex_walls[2])
    assert c["fiber_type"] == "A1xA1"
    assert c["fiber_dim"] == 2 * 2
    assert not c["top_stratum"] and c["typeI"]
    assert c["rate_check"]


def test_separation_identical_starts():
    rs = build_root_system("A", 2, 1)
    x = starts(rs, 1, 2)[0]
    res = separation_check(rs, [x, x])
    assert res.passed and np.all(res.distances[0] == 0.0)


def test_separation_dihedral_limits_differ():
    rs = build_root_system("I2", 3, 1)
    xs = [np.array([math.cos(a), math.sin(a)]) for a in (0.2, 0.35)]
    res = separation_check(rs, xs)
    assert res.passed
    assert res.limit_gaps[0] > 1e-6


@pytest.mark.parametrize("spec", [("B", 2, 1), ("A", 3, 1), ("I2", 4, (1, 2))], ids=str)
def test_separation_spherical_rate(spec):
    rs = build_root_system(*spec)
    res = separation_check(rs, starts(rs, 3, 17), "spherical")
    assert res.passed
    for d in res.distances:
        slope = np.diff(np.log(d**2)) / np.diff(res.times)
        assert slope.min() >= 2 * rs.n - 0.01


def test_correspondence_at_minimal_point():
    rs = build_root_system("A", 2, 1)
    cc = correspondence_check(rs, find_minimal_point(rs).p0)
    assert cc["stationary"]
    assert cc["deviation"] <= 1e-9


def test_correspondence_dihedral_time_relation():
    rs = build_root_system("I2", 4, (1, 2))
    cc = correspondence_check(rs, [math.cos(0.1), math.sin(0.1)])
    assert cc["time_relation_residual"] <= 1e-4
    assert cc["deviation"] <= 1e-5


def test_correspondence_b2():
    rs = build_root_system("B", 2, 1)
    for x in starts(rs, 3, 23):
        cc = correspondence_check(rs, x)
        assert cc["deviation"] <= 1e-5
        assert cc["samples"] > 10


def test_spherical_time_bound(small_rs):
    for x in starts(small_rs, 4, 31):
        tr = integrate(small_rs, x, "spherical")
        assert tr.collapse.T <= spherical_time_bound(small_rs, x) + 1e-8


def test_chamber_vertices(small_rs):
    v = chamber_vertices(small_rs)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-15)
    simple = small_rs.positive_roots[list(small_rs.simple)]
    dots = v @ simple.T
    assert np.all(np.abs(dots - np.diag(np.diag(dots))) < 1e-14)
    assert np.all(np.diag(dots) < 0)
    assert chamber_diameter(small_rs) <= 2.0


def test_a3_portrait_structure(a3_m2):
    pt = a3_m2
    np.testing.assert_allclose(pt.angles, [math.pi / 3, math.pi / 3, math.pi / 2], atol=1e-12)
    assert pt.fiber_types == ["A2", "A2", "A1xA1"]
    assert all(pt.separatrix_ok)
    assert len(set(pt.region_walls.values())) == 3
    assert set(pt.labels) <= {"D1", "D2", "D3", "separatrix"}
    assert pt.match_fraction() >= 0.95
    p = pt.to_chart(pt.p0)
    assert np.all(np.abs(p) < 1e-15)


def test_a3_region_limits_on_opposite_edge(a3_m2):
    pt = a3_m2
    for k in range(3):
        i, j = [a for a in range(3) if a != k]
        w = pt.region_walls[f"D{k + 1}"]
        assert w in pt.vertex_walls[i] and w in pt.vertex_walls[j]
        assert w not in pt.vertex_walls[k]


@given(st.integers(0, 10_000))
def test_focal_flows_in_one_stratum_have_distinct_limits(seed):
    rs = build_root_system("B", 3, 1)
    wall = rs.simple[0]
    a, b = [project_to_stratum(rs, x, frozenset([wall])) for x in starts(rs, 2, seed)]
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    la = integrate(rs, a, "focal", stratum=[wall]).collapse.x_limit.coords
    lb = integrate(rs, b, "focal", stratum=[wall]).collapse.x_limit.coords
    assert np.linalg.norm(la - lb) > 1e-6


def test_minimal_field_is_radial(small_rs):
    p0 = find_minimal_point(small_rs).p0
    h = mcv_euclidean(small_rs, p0)
    np.testing.assert_allclose(h, -small_rs.n * p0, atol=1e-10 * small_rs.n)
