import numpy as np
import pytest

from kfront import FrontFamily, build_kernel, make_grid, make_params, solve_instanton


@pytest.fixture(scope="session")
def params_1d():
    """beta = 2 model on the standard fine 1D grid."""
    grid = make_grid(1, 20.0, 2048)
    kernel = build_kernel(grid)
    return make_params(2.0, kernel)


@pytest.fixture(scope="session")
def family_1d(params_1d):
    return FrontFamily(solve_instanton(params_1d), params_1d)


@pytest.fixture(scope="session")
def params_1d_coarse():
    grid = make_grid(1, 20.0, 512)
    kernel = build_kernel(grid)
    return make_params(2.0, kernel)


@pytest.fixture(scope="session")
def family_1d_coarse(params_1d_coarse):
    return FrontFamily(solve_instanton(params_1d_coarse), params_1d_coarse)


@pytest.fixture(scope="session")
def params_2d():
    """beta = 2 model on a small 2D cylinder (fast linops/dynamics tests)."""
    grid = make_grid(2, 10.0, 256, 1.0, 16)
    kernel = build_kernel(grid)
    return make_params(2.0, kernel)


@pytest.fixture(scope="session")
def family_2d(params_2d):
    return FrontFamily(solve_instanton(params_2d), params_2d)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
