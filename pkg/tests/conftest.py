import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isoflow.analysis import random_chamber_points
from isoflow.weyl import build_root_system

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SMALL_SYSTEMS = [
    ("A", 2, 1), ("A", 3, 1), ("B", 2, 1), ("B", 3, (1, 2)), ("D", 4, 1),
    ("I2", 3, 1), ("I2", 4, (1, 2)), ("I2", 6, 1),
]


def system_id(spec):
    fam, k, m = spec
    return f"{fam}{k}-m{m}".replace(" ", "")


@pytest.fixture(params=SMALL_SYSTEMS, ids=system_id)
def small_rs(request):
    return build_root_system(*request.param)


def starts(rs, count, seed=0, concentration=2.0):
    return random_chamber_points(rs, np.random.default_rng(seed), count, concentration)


# acceptance lines, printed in the terminal summary so they survive output capture
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
