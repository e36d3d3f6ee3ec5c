import numpy as np
import pytest

from gkdv.spectral import Grid

ACCEPTANCE_LINES = []


@pytest.fixture
def small_grid():
    return Grid(32.0, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
