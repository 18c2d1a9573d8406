import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cmc_darboux import surfaces

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_cylinder():
    return surfaces.cylinder(16, 32)


@pytest.fixture(scope="session")
def cylinder64():
    return surfaces.cylinder(64, 256)


@pytest.fixture(scope="session")
def unduloid_small():
    return surfaces.delaunay("unduloid", 0.3, 16, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
