import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from isoflow.errors import OutOfDomain, UnsupportedG
from isoflow.flow import integrate, mcv_euclidean
from isoflow.rank2 import (maximal_time, minimal_angle, rank2_solution,
                           spherical_phase_portrait, theta_of_t)
from isoflow.weyl import build_root_system


def unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def dihedral(g, m1, m2):
    return build_root_system("I2", g, m1 if m1 == m2 else (m1, m2))


def numeric_angles(tr):
    return np.arctan2(tr.x[:, 1], tr.x[:, 0])


def test_initial_value():
    sol = rank2_solution(3, 1, 1, 0.2)
    th, r = theta_of_t(sol, 0.0)
    assert abs(th - 0.2) < 1e-15 and r == 1.0


@pytest.mark.parametrize("g,m1,m2", [(3, 1, 1), (4, 1, 3), (4, 2, 1), (6, 2, 2)])
def test_minimal_angle_is_stationary(g, m1, m2):
    sol = rank2_solution(g, m1, m2, minimal_angle(g, m1, m2))
    assert sol.branch == "stationary"
    assert sol.T == 1 / (2 * sol.n)
    for t in np.linspace(0, 0.99 * sol.T, 7):
        th, r = theta_of_t(sol, t)
        assert th == sol.theta0
        assert abs(r - math.sqrt(1 - 2 * sol.n * t)) < 1e-15


def test_g6_half_time_against_integrator():
    th0 = math.pi / 18
    sol = rank2_solution(6, 1, 1, th0)
    tr = integrate(build_root_system("I2", 6, 1), unit(th0), tol=1e-12,
                   t_eval=[sol.T / 2])
    x = tr.x[list(tr.t).index(sol.T / 2)]
    th, r = theta_of_t(sol, sol.T / 2)
    assert abs(th - math.atan2(x[1], x[0])) < 1e-8
    assert abs(r - np.linalg.norm(x)) < 1e-8


def test_minimal_angle_values():
    assert abs(minimal_angle(3) - math.pi / 6) < 1e-16
    assert abs(minimal_angle(6) - math.pi / 12) < 1e-16
    assert abs(minimal_angle(4, 2, 2) - math.pi / 8) < 1e-16
    th = minimal_angle(4, 1, 3)
    assert abs(th - math.pi / 12) < 1e-15
    rs = build_root_system("I2", 4, (1, 3))
    u = unit(th)
    assert np.linalg.norm(mcv_euclidean(rs, u) + rs.n * u) < 1e-12


def test_maximal_time_examples():
    sol = rank2_solution(3, 1, 1, math.pi / 12)
    assert abs(maximal_time(sol) - (1 - math.cos(math.pi / 4) ** (2 / 3)) / 6) < 1e-16
    # first g = 4 branch, cross-checked against the integrator
    sol = rank2_solution(4, 1, 2, math.pi / 16)
    assert sol.branch == "toward_0"
    c = (2 - 1) / (2 + 1)
    want = (1 - math.sqrt(3 / 2 * (math.cos(math.pi / 4) - c))) / 12
    assert abs(sol.T - want) < 1e-16
    tr = integrate(build_root_system("I2", 4, (1, 2)), unit(math.pi / 16))
    assert abs(tr.collapse.T - sol.T) < 1e-5


@pytest.mark.parametrize("g,m1,m2", [(3, 1, 1), (4, 1, 2), (4, 3, 1), (6, 1, 1)])
def test_phase_portrait(g, m1, m2):
    pp = spherical_phase_portrait(g, m1, m2, starts_per_arc=2)
    tg = minimal_angle(g, m1, m2)
    np.testing.assert_allclose(pp["p0"], unit(tg), atol=1e-16)
    assert [o["endpoint"] for o in pp["orbits"]] == [0.0, math.pi / g]
    for line in pp["flow_lines"]:
        want = 0.0 if line["theta0"] < tg else math.pi / g
        assert line["limit_theta"] == want
        assert abs(line["theta"][-1] - want) < 1e-5


def test_errors():
    with pytest.raises(UnsupportedG):
        minimal_angle(5)
    with pytest.raises(UnsupportedG):
        rank2_solution(8, 1, 1, 0.1)
    with pytest.raises(OutOfDomain):
        rank2_solution(3, 1, 1, math.pi / 3)
    sol = rank2_solution(3, 1, 1, 0.3)
    with pytest.raises(OutOfDomain):
        theta_of_t(sol, 1.1 * sol.T)
    with pytest.raises(OutOfDomain):
        theta_of_t(sol, -1e-3)


cases = st.tuples(
    st.sampled_from([3, 4, 6]), st.integers(1, 4), st.integers(1, 4),
    st.floats(0.02, 0.98))


@given(cases)
def test_closed_form_against_integrator(case):
    g, m1, m2, u = case
    if g != 4:
        m2 = m1
    tg = minimal_angle(g, m1, m2)
    th0 = u * math.pi / g
    assume(abs(th0 - tg) > 1e-3)
    sol = rank2_solution(g, m1, m2, th0)
    tr = integrate(dihedral(g, m1, m2), unit(th0))
    assert abs(tr.collapse.T - sol.T) <= 1e-4 * sol.T
    keep = tr.t <= 0.95 * sol.T
    ang = numeric_angles(tr)[keep]
    closed = np.array([theta_of_t(sol, t)[0] for t in tr.t[keep]])
    assert np.max(np.abs(ang - closed)) <= 1e-6
    # the angle leaves the minimal direction monotonically
    dist = np.abs(numeric_angles(tr) - tg)
    assert np.all(np.diff(dist) >= -1e-12)
