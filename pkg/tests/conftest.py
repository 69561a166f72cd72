import numpy as np
import pytest

from dirac_ewi import build_grid, get_preset

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def preset1d():
    return get_preset("1d-convergence")


@pytest.fixture
def grid1d():
    return build_grid(1, (0.0, 2 * np.pi), 32)


@pytest.fixture
def grid2d():
    return build_grid(2, (-3.0, 5.0), (8, 12))


def random_coeffs(rng, grid, decay=True):
    """Random Fourier coefficients, optionally decaying with |mode|."""
    shape = (2,) + grid.points
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if decay:
        mus = np.meshgrid(*(grid.modes(k) for k in range(grid.dim)), indexing="ij")
        c *= np.exp(-0.3 * sum(np.abs(m) for m in mus))
    return c
