import numpy as np
import pytest

from dampedqbm.grid import make_grid
from dampedqbm.units import PROTON_MASS


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8.0, 257)


@pytest.fixture(scope="session")
def coarse_grid():
    return make_grid(8.0, 129)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def mass():
    return PROTON_MASS


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
