import numpy as np
import pytest

from ramix.spectrum import CANONICAL_GRID, Spectrum, WavenumberGrid
from ramix.synthgen import standard_library


@pytest.fixture(scope="session")
def library():
    return standard_library()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_grid():
    return WavenumberGrid(300.0, 400.0, 101)


def make_spectrum(values, grid=CANONICAL_GRID):
    return Spectrum(grid, np.asarray(values, dtype=np.float64))


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
