import numpy as np
import pytest
from hypothesis import settings

from hyperlab.geometry import Geometry, RadialField, make_grid

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

H3 = Geometry.HYPERBOLIC3
R3 = Geometry.EUCLIDEAN3


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=[H3, R3], ids=["h3", "r3"])
def geometry(request):
    return request.param


@pytest.fixture
def small_grid(geometry):
    return make_grid(geometry, 20.0, 511)


def random_field(grid, rng, decay=True):
    """Random smooth-ish complex field, optionally localized away from the wall."""
    vals = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    if decay:
        vals = vals * np.exp(-grid.nodes**2 / 8)
    return RadialField(grid, vals)


#: one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def smooth_field(grid, rng, scale=4.0):
    """Random field whose sine spectrum decays like exp(-lambda^2 / scale^2)."""
    from hyperlab.geometry import dual_grid
    from hyperlab.transform import from_sine_amplitudes
    lam = dual_grid(grid).modes
    G = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * np.exp(-(lam / scale) ** 2)
    return RadialField(grid, from_sine_amplitudes(G, grid))


def pytest_terminal_summary(terminalreporter):
    lines = ACCEPTANCE_LINES
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
