import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoflow.analysis import find_minimal_point
from isoflow.errors import MultipleRootAtBoundary, NotInImage, UnsupportedFamily
from isoflow.flow import integrate
from isoflow.invariants import (eval_invariants, exact_collapse_time,
                                exact_recursion, exact_trajectory,
                                invariant_degrees, oracle_eta, recover_point)
from isoflow.weyl import build_root_system, canonical_chamber_center, reflect

from conftest import SMALL_SYSTEMS, starts


def unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def test_a2_example_values():
    rs = build_root_system("A", 2, 1)
    s = eval_invariants(rs, np.array([-1.0, 0.0, 1.0]) / math.sqrt(2))
    np.testing.assert_allclose(s, [0.0, -0.5, 0.0], atol=1e-16)


@pytest.mark.parametrize("g", [3, 4, 5, 6, 8])
def test_i2_values_on_unit_circle(g):
    rs = build_root_system("I2", g, 1)
    th = 0.3 * math.pi / g
    p1, p2 = eval_invariants(rs, unit(th))
    assert abs(p1 - 1) < 1e-15
    assert abs(p2 - math.cos(g * th)) < 1e-14


def test_b2_recursion_coefficients():
    rec = exact_recursion(build_root_system("B", 2, 1))
    # zeta_1' = -8, zeta_2' = -2 zeta_1
    assert rec.eta([Fraction(5), Fraction(7)]) == [-8, -10]


@pytest.mark.parametrize("k,m", [(1, 1), (2, 1), (3, 2), (5, 1)])
def test_a_second_coordinate_rate(k, m):
    rs = build_root_system("A", k, m)
    rec = exact_recursion(rs)
    y = [Fraction(3)] * (k + 1)
    assert rec.eta(y)[1] == rs.n
    assert rec.eta(y)[0] == 0


@pytest.mark.parametrize("k", [4, 5, 6])
def test_d_last_coordinate_constant(k):
    rec = exact_recursion(build_root_system("D", k, 1))
    y = [Fraction(j + 2) for j in range(k)]
    assert rec.eta(y)[-1] == 0


def test_generic_dihedral_unsupported():
    with pytest.raises(UnsupportedFamily):
        exact_recursion(build_root_system("I2", 5, 1))


def test_i2_3_trajectory():
    rs = build_root_system("I2", 3, 1)
    th = math.pi / 12
    et = exact_trajectory(rs, unit(th))
    for t in (0.0, 0.01, 0.02):
        y1, y2 = et(t)
        assert abs(y1 - (1 - 6 * t)) < 1e-15
        assert abs(y2 - math.cos(3 * th)) < 1e-15
    assert et.t_degree(1) == 0


@pytest.mark.parametrize("m1,m2", [(1, 2), (2, 1), (1, 3), (2, 2)])
def test_i2_4_trajectory(m1, m2):
    rs = build_root_system("I2", 4, (m1, m2))
    n = rs.n
    th = 0.13
    et = exact_trajectory(rs, unit(th))
    for t in (0.0, 0.005, 0.02):
        want = math.cos(4 * th) - 8 * (m2 - m1) * (t - n * t * t)
        assert abs(et(t)[1] - want) < 1e-14


def test_b2_spherical_first_coordinate_stationary():
    rs = build_root_system("B", 2, 1)
    x0 = starts(rs, 1, 3)[0]
    et = exact_trajectory(rs, x0, spherical=True)
    z0 = et.initial[0]
    # zeta_1 = 1 + (zeta_1(0) - 1) e^{2nt}: constant exactly when |x0| = 1
    assert et.h(0) == [1]
    assert et.c1(0) == z0 - 1
    for t in (0.0, 0.05, 0.3, 1.0):
        bound = abs(float(z0 - 1)) * math.exp(2 * rs.n * t) + 1e-15
        assert abs(et(t)[0] - 1.0) <= bound


def test_b2_spherical_matches_numeric():
    rs = build_root_system("B", 2, 1)
    x0 = starts(rs, 1, 4)[0]
    et = exact_trajectory(rs, x0, spherical=True)
    tr = integrate(rs, x0, variant="spherical", t_end=0.05)
    for t, x in zip(tr.t, tr.x):
        np.testing.assert_allclose(eval_invariants(rs, x), et(t), atol=1e-8)


@given(st.sampled_from(SMALL_SYSTEMS), st.integers(0, 10_000))
def test_degree_bound(spec, seed):
    rs = build_root_system(*spec)
    et = exact_trajectory(rs, starts(rs, 1, seed)[0])
    for r, d in enumerate(invariant_degrees(rs)):
        assert et.t_degree(r) <= d // 2


@given(st.sampled_from(SMALL_SYSTEMS), st.integers(0, 10_000),
       st.lists(st.integers(0, 100), min_size=1, max_size=4))
def test_reflection_invariance(spec, seed, word):
    rs = build_root_system(*spec)
    x = starts(rs, 1, seed)[0]
    y = x
    for i in word:
        y = reflect(rs, i % rs.n_roots, y)
    np.testing.assert_allclose(eval_invariants(rs, y), eval_invariants(rs, x),
                               atol=1e-13, rtol=1e-12)


@given(st.sampled_from(SMALL_SYSTEMS), st.integers(0, 10_000))
def test_round_trip(spec, seed):
    rs = build_root_system(*spec)
    x = starts(rs, 1, seed)[0]
    back = recover_point(rs, eval_invariants(rs, x))
    assert np.max(np.abs(back.coords - x)) <= 1e-9
    assert back.stratum == frozenset()


def test_round_trip_center(small_rs):
    c = canonical_chamber_center(small_rs).coords
    np.testing.assert_allclose(recover_point(small_rs, eval_invariants(small_rs, c)).coords,
                               c, atol=1e-12)


@pytest.mark.parametrize("g", [3, 4, 6])
def test_i2_recovery_of_unit_point(g):
    rs = build_root_system("I2", g, 1)
    th = 0.7 * math.pi / g
    np.testing.assert_allclose(recover_point(rs, [1.0, math.cos(g * th)]).coords,
                               unit(th), atol=1e-14)


@given(st.sampled_from(SMALL_SYSTEMS), st.integers(0, 10_000))
def test_recursion_matches_derivative_oracle(spec, seed):
    rs = build_root_system(*spec)
    x = starts(rs, 1, seed)[0]
    eta = np.array([float(v) for v in exact_recursion(rs).eta(eval_invariants(rs, x))])
    orc = oracle_eta(rs, x)
    assert np.all(np.abs(eta - orc) <= 1e-6 * np.maximum(np.abs(orc), 1.0))


def test_exact_matches_numeric(small_rs):
    for x in starts(small_rs, 3, 11):
        tr = integrate(small_rs, x)
        et = exact_trajectory(small_rs, x)
        T = tr.collapse.T
        for t, xt in zip(tr.t, tr.x):
            if t > 0.9 * T:
                break
            ex = et(t)
            num = np.array(eval_invariants(small_rs, xt))
            assert np.all(np.abs(num - ex) <= 1e-6 * np.maximum(np.abs(ex), 1.0))


def test_not_in_image():
    with pytest.raises(NotInImage):
        recover_point(build_root_system("I2", 3, 1), [1.0, 2.0])
    with pytest.raises(NotInImage):
        # z^3 + z has a complex pair of roots
        recover_point(build_root_system("A", 2, 1), [0.0, 1.0, 0.0])
    with pytest.raises(NotInImage):
        # z^2 - z - 2 = (z - 2)(z + 1): negative square
        recover_point(build_root_system("B", 2, 1), [1.0, -2.0])


def test_boundary_point_reported():
    rs = build_root_system("B", 2, 1)
    y = eval_invariants(rs, [-1.0, 0.0])
    pt = recover_point(rs, y)
    assert len(pt.stratum) == 1
    with pytest.raises(MultipleRootAtBoundary) as info:
        recover_point(rs, y, strict=True)
    np.testing.assert_allclose(info.value.point.coords, [-1.0, 0.0], atol=1e-15)


def test_b2_recovered_limit_on_numeric_wall():
    rs = build_root_system("B", 2, 1)
    for x in starts(rs, 4, 21):
        T, lim = exact_collapse_time(rs, x)
        rep = integrate(rs, x).collapse
        assert abs(T - rep.T) <= 1e-7 * T
        assert lim.stratum == frozenset(rep.active_walls)
        np.testing.assert_allclose(lim.coords, rep.x_limit.coords, atol=1e-5)


def test_exact_collapse_i2_3_closed_form():
    rs = build_root_system("I2", 3, 1)
    T, lim = exact_collapse_time(rs, unit(math.pi / 12))
    assert abs(T - (1 - math.cos(math.pi / 4) ** (2 / 3)) / 6) < 1e-15
    # theta0 below the minimal angle: limit on the theta = 0 wall
    assert lim.coords[1] == 0.0 and lim.coords[0] > 0


def test_exact_collapse_i2_4_second_branch():
    m1, m2 = 1, 2
    rs = build_root_system("I2", 4, (m1, m2))
    n = rs.n
    th4 = 0.25 * math.acos((m2 - m1) / (m2 + m1))
    th = 0.5 * (th4 + math.pi / 4)
    want = (1 - math.sqrt((m1 + m2) / (2 * m2)
                          * (-math.cos(4 * th) + (m2 - m1) / (m2 + m1)))) / (2 * n)
    T, lim = exact_collapse_time(rs, unit(th))
    assert abs(T - want) < 1e-14
    ang = math.atan2(lim.coords[1], lim.coords[0])
    assert abs(ang - math.pi / 4) < 1e-9


@pytest.mark.parametrize("spec", SMALL_SYSTEMS, ids=str)
def test_exact_collapse_at_minimal_point(spec):
    rs = build_root_system(*spec)
    p0 = find_minimal_point(rs).p0
    T, lim = exact_collapse_time(rs, p0)
    assert abs(T - 1 / (2 * rs.n)) <= 1e-9
    assert np.all(lim.coords == 0.0)


def test_collapse_time_below_radial_bound(small_rs):
    for x in starts(small_rs, 5, 5):
        T, _ = exact_collapse_time(small_rs, x)
        assert T < 1 / (2 * small_rs.n)


def test_distinct_limits():
    rs = build_root_system("A", 3, 1)
    a, b = starts(rs, 2, 9)
    (Ta, la), (Tb, lb) = exact_collapse_time(rs, a), exact_collapse_time(rs, b)
    assert abs(Ta - Tb) > 0 or np.linalg.norm(la.coords - lb.coords) > 1e-6
    assert np.linalg.norm(la.coords - lb.coords) > 1e-6


def test_json_rationals():
    rs = build_root_system("B", 2, 1)
    et = exact_trajectory(rs, [-0.75, -0.5])
    doc = json.loads(json.dumps(et.to_dict()))
    assert doc["coefficients"][0] == ["13/16", "-8/1"]
    sph = exact_trajectory(rs, [-0.6, -0.8], spherical=True).to_dict()
    entry = sph["coefficients"][1]
    assert set(entry) >= {"c1", "h", "s"} and entry["s"] == 4
    for v in entry["h"]:
        p, q = v.split("/")
        int(p), int(q)
