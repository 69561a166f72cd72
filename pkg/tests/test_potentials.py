import numpy as np
import pytest

from dirac_ewi import ConfigError, build_grid, expression_potential, get_preset, list_presets
from dirac_ewi.potentials import (HONEYCOMB_DIRECTIONS, constant_potential, honeycomb_V,
                                  resolve_scenario, zero_potential)


def test_convergence_preset_golden_values(preset1d):
    pot = preset1d.potential(1.0)
    g = build_grid(1, preset1d.bounds, 4)  # nodes 0, pi/2, pi, 3pi/2
    V, A1, A2 = pot.sample(g, 0.0)
    assert np.allclose(V, [2 / 3, 1.0, 2.0, 1.0])
    assert np.allclose(A1, [1 / 3, 0.5, 1.0, 0.5])
    assert np.all(A2 == 0)
    phi = preset1d.initial(g).values
    assert np.allclose(phi[0], [1 / 3, 0.5, 1.0, 0.5])
    assert np.allclose(phi[1], [1.0, 0.5, 1.0, 0.5])
    assert pot.sup_norms == (2.0, 1.0)


def test_honeycomb_golden_values_and_symmetry(rng):
    assert honeycomb_V(0, 0.0, 0.0) == pytest.approx(3.0)
    # unit directions at 120 degrees
    d = np.array(HONEYCOMB_DIRECTIONS)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.allclose(d.sum(axis=0), 0.0)
    x, y = rng.uniform(-15, 15, (2, 200))
    c, s = np.cos(2 * np.pi / 3), np.sin(2 * np.pi / 3)
    v = honeycomb_V(0, x, y)
    assert np.allclose(honeycomb_V(0, c * x - s * y, s * x + c * y), v, atol=1e-12)
    assert np.allclose(honeycomb_V(0, -x, -y), v, atol=1e-12)
    assert np.all(v <= 3 + 1e-12) and np.all(v >= -1.5 - 1e-12)


def test_presets_real_valued_and_periodic():
    for name in ("1d-convergence", "2d-honeycomb"):
        p = get_preset(name)
        g = p.grid(16)
        for t in (0.0, 1.3):
            for part in p.potential(1.0).sample(g, t):
                assert part.dtype == float and np.all(np.isfinite(part))
    assert get_preset("1d-convergence").periodic_mismatch() < 1e-15
    assert get_preset("2d-honeycomb").periodic_mismatch() < 1e-40


def test_gaussian_density_at_time_zero():
    p = get_preset("2d-honeycomb")
    g = p.grid(64)
    phi = p.initial(g).values
    x, y = g.mesh()
    rho = np.abs(phi[0]) ** 2 + np.abs(phi[1]) ** 2
    assert np.allclose(rho, 2 * np.exp(-(x ** 2 + y ** 2)))


def test_unknown_preset_and_listing():
    with pytest.raises(ConfigError):
        get_preset("3d-cube")
    listing = list_presets()
    names = [line.split("\t")[0] for line in listing.splitlines()]
    assert names == sorted(names) and {"1d-convergence", "2d-honeycomb"} <= set(names)
    assert list_presets() == listing


def test_eps_range_enforced():
    with pytest.raises(ConfigError):
        get_preset("1d-convergence").potential(1.5)
    with pytest.raises(ConfigError):
        zero_potential(1, -0.1)


def test_expression_potential_matches_preset(preset1d):
    g = preset1d.grid(32)
    pot = expression_potential("2/(2+cos(x))", ["1/(2+cos(x))"], eps=0.5)
    assert pot.time_independent
    for a, b in zip(pot.sample(g, 0.0), preset1d.potential(0.5).sample(g, 0.0)):
        assert np.allclose(a, b, rtol=1e-15)


def test_time_dependent_expression_not_cached():
    pot = expression_potential("sin(t)+x", ["0"])
    g = build_grid(1, (0, 1), 4)
    assert not pot.time_independent
    assert not np.allclose(pot.sample(g, 0.0)[0], pot.sample(g, 1.0)[0])


def test_expression_scenario_round_trip():
    spec = {"dim": 2, "bounds": [[0, 6.283185307179586], [0, 6.283185307179586]],
            "V": "cos(x)*cos(y)", "A": ["0", "sin(y)"],
            "phi1": "exp(-(x-3)^2)", "phi2": "0"}
    p = resolve_scenario(spec)
    g = p.grid(8)
    V, A1, A2 = p.potential(1.0).sample(g, 0.0)
    x, y = g.mesh()
    assert np.allclose(V, (np.cos(x) * np.cos(y)).ravel())
    assert np.allclose(A2, np.sin(y).ravel())
    with pytest.raises(ConfigError):
        resolve_scenario(dict(spec, phi2="t"))
    with pytest.raises(ConfigError):
        resolve_scenario(dict(spec, A=["0"]))


def test_constant_potential_declares_norms():
    pot = constant_potential(0.5, (-0.25,), 0.1)
    assert pot.sup_norms == (0.5, 0.25)
    V, A1, _ = pot.sample(build_grid(1, (0, 1), 4), 3.0)
    assert np.all(V == 0.5) and np.all(A1 == -0.25)
