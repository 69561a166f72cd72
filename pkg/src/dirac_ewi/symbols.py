"""Closed-form functions of the per-mode Dirac symbol.

For each mode the symbol is ``Gamma = mu1 s1 + mu2 s2 + s3`` (``mu2 = 0`` in
1D) and satisfies ``Gamma^2 = delta^2 I`` with ``delta = sqrt(1 + |mu|^2)``.
Any scalar function ``f`` therefore acts as

    f(Gamma) = a_f I + b_f Gamma,
    a_f = (f(delta) + f(-delta)) / 2,  b_f = (f(delta) - f(-delta)) / (2 delta),

so a table only stores two complex numbers per mode and function.
"""
from typing import Dict, Tuple

import numpy as np

from . import _kernels
from .errors import ConfigError, ContractError
from .grid import Grid

FUNCTIONS = ("exp", "sin", "inv", "q1", "q2")

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# |x| below this uses the series for sin(x) - x; 11 terms keep the
# truncation below 1e-30 relative at the switch.
_SERIES_SWITCH = 0.5


def sin_minus_x(x: np.ndarray) -> np.ndarray:
    """``sin(x) - x`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    out = np.sin(x) - x
    small = np.abs(x) < _SERIES_SWITCH
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        term = -xs * x2 / 6.0
        acc = term.copy()
        for k in range(2, 12):
            term = -term * x2 / ((2 * k) * (2 * k + 1))
            acc += term
        out[small] = acc
    return out


def scalar_weights(name: str, tau: float, delta: np.ndarray):
    """Return ``(a_f, b_f)`` for one function id, vectorized over modes."""
    delta = np.asarray(delta, dtype=float)
    x = tau * delta
    d2 = delta * delta
    if name == "exp":
        # e^{-i tau lambda}
        return np.cos(x) + 0j, -1j * np.sin(x) / delta
    if name == "sin":
        return np.zeros_like(delta) + 0j, np.sin(x) / delta + 0j
    if name == "inv":
        return np.zeros_like(delta) + 0j, 1.0 / d2 + 0j
    half = np.sin(0.5 * x) ** 2
    if name == "q1":
        # -i (1 - e^{-i tau lambda}) / lambda, using 1 - e^{-ix} = 2 sin^2(x/2) + i sin x
        return np.sin(x) / delta + 0j, -2j * half / d2
    if name == "q2":
        # -i tau / lambda + (1 - e^{-i tau lambda}) / lambda^2
        return 2.0 * half / d2 + 0j, 1j * sin_minus_x(x) / (d2 * delta)
    raise ContractError(f"unknown symbol function {name!r}; known: {FUNCTIONS}")


class SymbolTable:
    """Per-mode ``delta`` and ``(a_f, b_f)`` pairs for a fixed step ``tau``.

    Arrays are flattened over the grid in FFT bin order. ``q1``/``q2`` are
    only available for ``tau > 0``; the trigonometric ones accept a negative
    step, which the time-reversal of the symmetric scheme relies on.
    """

    def __init__(self, grid: Grid, tau: float):
        if tau == 0 or not np.isfinite(tau):
            raise ConfigError(f"time step must be finite and nonzero, got {tau}")
        self.grid = grid
        self.tau = float(tau)
        mus = np.meshgrid(*(grid.wavenumbers(k) for k in range(grid.dim)),
                          indexing="ij")
        self.mu1 = np.ascontiguousarray(mus[0].ravel())
        self.mu2 = (np.ascontiguousarray(mus[1].ravel()) if grid.dim == 2
                    else np.zeros_like(self.mu1))
        self.delta = np.sqrt(1.0 + self.mu1 ** 2 + self.mu2 ** 2)
        self._coeffs: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
        names = FUNCTIONS if self.tau > 0 else ("exp", "sin", "inv")
        for name in names:
            a, b = scalar_weights(name, self.tau, self.delta)
            self._coeffs[name] = (np.ascontiguousarray(a),
                                  np.ascontiguousarray(b))

    def coeffs(self, name: str) -> Tuple[np.ndarray, np.ndarray]:
        try:
            return self._coeffs[name]
        except KeyError:
            if name in ("q1", "q2"):
                raise ConfigError(
                    f"{name} weights need tau > 0, table has tau={self.tau}")
            raise ContractError(
                f"unknown symbol function {name!r}; known: {FUNCTIONS}") from None

    def _flat_index(self, mode) -> int:
        return int(np.ravel_multi_index(self.grid.mode_bin(mode),
                                        self.grid.points))

    def gamma(self, mode) -> np.ndarray:
        k = self._flat_index(mode)
        return (self.mu1[k] * PAULI[0] + self.mu2[k] * PAULI[1] + PAULI[2])

    def matrix(self, name: str, mode) -> np.ndarray:
        a, b = self.coeffs(name)
        k = self._flat_index(mode)
        return a[k] * np.eye(2) + b[k] * self.gamma(mode)

    def apply(self, name: str, values: np.ndarray) -> np.ndarray:
        """Apply ``f(Gamma_l)`` to every mode of a ``(2, *points)`` array."""
        a, b = self.coeffs(name)
        flat = np.ascontiguousarray(values.reshape(2, -1), dtype=complex)
        out = _kernels.active.symbol_apply(a, b, self.mu1, self.mu2, flat)
        return out.reshape(values.shape)


def symbol_function(table: SymbolTable, name: str, mode) -> np.ndarray:
    """2x2 matrix of ``f(Gamma_l)`` for one mode index (int or pair)."""
    return table.matrix(name, mode)


def gautschi_weights(table: SymbolTable, mode) -> Tuple[np.ndarray, np.ndarray]:
    """The two Gautschi weight matrices of the one-step exponential integrator.

    ``Q1 = -i Gamma^-1 (I - e^{-i tau Gamma})`` and
    ``Q2 = -i tau Gamma^-1 + Gamma^-2 (I - e^{-i tau Gamma})``.
    """
    if table.tau <= 0:
        raise ConfigError(f"Gautschi weights need tau > 0, got {table.tau}")
    return table.matrix("q1", mode), table.matrix("q2", mode)
