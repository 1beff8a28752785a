import numpy as np
import pytest

from plapmp import ExponentConfig, WeightPair, interval, principal_curve, rectangle

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sym2():
    return ExponentConfig.symmetric(2.0)


@pytest.fixture(scope="session")
def unit_interval():
    return interval(1.0, 256)


@pytest.fixture(scope="session")
def eig_p2(unit_interval, sym2):
    return principal_curve(unit_interval, sym2, WeightPair.constant(unit_interval))


@pytest.fixture(scope="session")
def eig_p3():
    dom = interval(1.0, 256)
    cfg = ExponentConfig.symmetric(3.0)
    return dom, cfg, principal_curve(dom, cfg, WeightPair.constant(dom))


@pytest.fixture(scope="session")
def small_square():
    return rectangle(1.0, 1.0, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
