import numpy as np
import pytest

from toge import GeodesicPair, QuadConfig, canonical

PERTURB = [((1,), 0.5), ((2,), -0.5)]  # f = x(1 - x) / 2
SIMPLEX_PERTURB = [((1, 0), 0.5), ((2, 0), -0.5), ((0, 1), 0.5), ((0, 2), -0.5),
                   ((1, 1), 0.25)]


@pytest.fixture(scope="session")
def fs_interval():
    return canonical("interval")


@pytest.fixture(scope="session")
def perturbed_interval():
    return canonical("interval", PERTURB)


@pytest.fixture(scope="session")
def interval_pair(fs_interval, perturbed_interval):
    return GeodesicPair(fs_interval, perturbed_interval)


@pytest.fixture(scope="session")
def simplex_pair():
    u0 = canonical("simplex")
    u1 = canonical("simplex", SIMPLEX_PERTURB)
    return GeodesicPair(u0, u1, quad=QuadConfig(cells_per_axis=16))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
