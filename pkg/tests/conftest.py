import numpy as np
import pytest

import branevortex as bv
from branevortex.periodic import make_periodic_problem

TWO_PI = 2.0 * np.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def small_torus_problem():
    """32^2 admissible l=3 problem reused by the cheap variational tests."""
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 32, 32)
    spec = bv.make_vortex_spec(
        [[[2.0, 2.5]], [[4.0, 3.5]], []], grid)
    return make_periodic_problem(spec)


@pytest.fixture(scope="session")
def vacuum_torus_problem():
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 32, 32)
    spec = bv.make_vortex_spec([[], []], grid)
    return make_periodic_problem(spec)


def band_limited(grid, rng, modes=4, amplitude=1.0):
    """Random real trigonometric polynomial evaluated analytically."""
    out = np.zeros_like(grid.X)
    for _ in range(modes):
        mx, my = rng.integers(-3, 4, size=2)
        phase = rng.uniform(0, TWO_PI)
        amp = amplitude * rng.uniform(0.2, 1.0)
        out += amp * np.cos(2 * np.pi * (mx * grid.X / grid.Lx
                                         + my * grid.Y / grid.Ly) + phase)
    return out
