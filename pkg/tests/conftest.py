import sys
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from h1geo.catalog import ENTRIES, make_surface

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SURFACES = sorted(ENTRIES)


@pytest.fixture(scope="session")
def surfaces():
    return {name: make_surface(name) for name in SURFACES}


@pytest.fixture(scope="session")
def torus():
    return make_surface("torus_revolution")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_points(patch, n, rng, pad=0.0):
    u0, u1, v0, v1 = patch.domain
    du, dv = pad * (u1 - u0), pad * (v1 - v0)
    return rng.uniform(u0 + du, u1 - du, n), rng.uniform(v0 + dv, v1 - dv, n)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
