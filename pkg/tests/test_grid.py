import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_ewi import ConfigError, ContractError, SpinorField, build_grid
from dirac_ewi.grid import from_fourier, sample_field, to_fourier

from conftest import random_coeffs


@pytest.mark.parametrize("points", [7, 2, 0, 5.5])
def test_bad_point_counts_rejected(points):
    with pytest.raises(ConfigError):
        build_grid(1, (0, 1), points)


@pytest.mark.parametrize("bounds", [(1.0, 1.0), (2.0, 1.0), (0.0, np.inf)])
def test_degenerate_bounds_rejected(bounds):
    with pytest.raises(ConfigError):
        build_grid(1, bounds, 8)


def test_dimension_checked():
    with pytest.raises(ConfigError):
        build_grid(3, (0, 1), 8)
    with pytest.raises(ConfigError):
        build_grid(2, (0, 1), (8, 8, 8))


def test_nodes_exclude_right_endpoint():
    g = build_grid(1, (0.0, 2 * np.pi), 8)
    assert g.spacing[0] == pytest.approx(np.pi / 4)
    assert g.nodes()[0] == 0.0
    assert g.nodes()[-1] == pytest.approx(2 * np.pi - np.pi / 4)


def test_modes_in_bin_order():
    g = build_grid(1, (0.0, 2 * np.pi), 8)
    assert list(g.modes()) == [0, 1, 2, 3, -4, -3, -2, -1]
    assert np.allclose(g.wavenumbers(), g.modes())
    assert g.mode_bin(-4) == (4,)
    assert g.mode_bin(3) == (3,)
    with pytest.raises(ContractError):
        g.mode_bin(4)


def test_wavenumbers_scale_with_length():
    g = build_grid(2, (-15.0, 15.0), 16)
    assert g.wavenumbers(1)[1] == pytest.approx(2 * np.pi / 30)
    assert g.mode_bin((-1, 2)) == (15, 2)


def test_single_mode_has_unit_coefficient():
    g = build_grid(1, (1.0, 4.0), 16)
    mu = g.wavenumbers()[g.mode_bin(-3)]
    field = sample_field(g, lambda x: np.exp(1j * mu * (x - 1.0)), lambda x: 0 * x)
    coeffs = to_fourier(field).values
    expected = np.zeros_like(coeffs)
    expected[0, g.mode_bin(-3)] = 1.0
    assert np.allclose(coeffs, expected, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), two_d=st.booleans())
def test_transform_round_trip_and_parseval(seed, two_d):
    rng = np.random.default_rng(seed)
    g = build_grid(2, (0.0, 3.0), (8, 6)) if two_d else build_grid(1, (-1.0, 2.0), 10)
    f = SpinorField(g, random_coeffs(rng, g, decay=False))
    back = from_fourier(to_fourier(f))
    assert np.allclose(back.values, f.values, atol=1e-13)
    assert to_fourier(f).norm() == pytest.approx(f.norm(), rel=1e-13)


def test_representation_mismatch_is_contract_error(grid1d):
    f = SpinorField(grid1d, np.zeros((2, 32)))
    with pytest.raises(ContractError):
        from_fourier(f)
    with pytest.raises(ContractError):
        to_fourier(to_fourier(f))
    with pytest.raises(ContractError):
        SpinorField(grid1d, np.zeros((2, 16)))
