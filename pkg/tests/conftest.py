import numpy as np
import pytest

from nlcontrol.dense import dense_operator, space_time_matrices
from nlcontrol.evolution import make_dynamics
from nlcontrol.grid import build_grid, named_kernel

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def paper_grid():
    return build_grid(60, 100, 1.0, 0.1)


@pytest.fixture(scope="session")
def paper_dyn(paper_grid):
    return make_dynamics(paper_grid, named_kernel("paper", paper_grid), (0.2, 0.8))


@pytest.fixture(scope="session")
def paper_target(paper_grid):
    return np.tile(np.sin(2 * np.pi * paper_grid.x), (paper_grid.n_steps, 1))


@pytest.fixture(scope="session")
def tiny_grid():
    return build_grid(5, 4, 1.0, 0.1)


@pytest.fixture(scope="session")
def tiny_dyn(tiny_grid):
    return make_dynamics(tiny_grid, named_kernel("paper", tiny_grid), (0.2, 0.8))


@pytest.fixture(scope="session")
def tiny_mats(tiny_grid, tiny_dyn):
    kern = named_kernel("paper", tiny_grid)
    return space_time_matrices(tiny_grid, dense_operator(tiny_grid, kern.k1, kern.k2),
                               tiny_dyn.control.mask)
