"""Periodic grids, spinor fields and the discrete Fourier coefficient maps.

Mode ``l`` in ``{-N/2, ..., N/2 - 1}`` lives in FFT bin ``l mod N``. Every
per-mode array in the package uses this bin order.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError, ContractError

REAL = "real"
FOURIER = "fourier"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic tensor grid. The right endpoint is never stored."""

    bounds: Tuple[Tuple[float, float], ...]
    points: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def lengths(self) -> Tuple[float, ...]:
        return tuple(b - a for a, b in self.bounds)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    def nodes(self, axis: int = 0) -> np.ndarray:
        a, _ = self.bounds[axis]
        return a + np.arange(self.points[axis]) * self.spacing[axis]

    def mesh(self) -> Tuple[np.ndarray, ...]:
        """Node coordinates broadcast to the full grid shape."""
        return tuple(np.meshgrid(*(self.nodes(k) for k in range(self.dim)),
                                 indexing="ij"))

    def modes(self, axis: int = 0) -> np.ndarray:
        """Mode indices ``l`` in FFT bin order."""
        n = self.points[axis]
        return np.rint(np.fft.fftfreq(n) * n).astype(np.int64)

    def wavenumbers(self, axis: int = 0) -> np.ndarray:
        """``mu_l = 2 pi l / (b - a)`` in FFT bin order."""
        return 2.0 * np.pi * self.modes(axis) / self.lengths[axis]

    def mode_bin(self, mode) -> Tuple[int, ...]:
        """FFT bin of a mode index (int in 1D, pair in 2D)."""
        mode = (mode,) if np.isscalar(mode) else tuple(mode)
        if len(mode) != self.dim:
            raise ContractError(f"mode {mode} does not match a {self.dim}D grid")
        out = []
        for l, n in zip(mode, self.points):
            if not -n // 2 <= l < n // 2:
                raise ContractError(f"mode {l} outside [-{n // 2}, {n // 2 - 1}]")
            out.append(int(l) % n)
        return tuple(out)

    def refine(self, factor: int) -> "Grid":
        return Grid(self.bounds, tuple(n * factor for n in self.points))

    def with_points(self, points) -> "Grid":
        return build_grid(self.dim, self.bounds, points)


def build_grid(dim: int,
               bounds: Union[Tuple[float, float], Sequence[Tuple[float, float]]],
               points: Union[int, Sequence[int]]) -> Grid:
    """Validate and build a 1D or 2D periodic grid.

    ``bounds`` may be a single ``(a, b)`` pair shared by all axes, and
    ``points`` a single count shared by all axes.
    """
    if dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {dim}")
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape == (2,):
        bounds = np.tile(bounds, (dim, 1))
    if bounds.shape != (dim, 2):
        raise ConfigError(f"bounds must give (a, b) for each of {dim} axes")
    if not np.all(np.isfinite(bounds)):
        raise ConfigError("bounds must be finite")
    if np.any(bounds[:, 1] <= bounds[:, 0]):
        raise ConfigError("bounds must satisfy b > a on every axis")
    if np.isscalar(points):
        points = (points,) * dim
    points = tuple(points)
    if len(points) != dim:
        raise ConfigError(f"need {dim} point counts, got {len(points)}")
    for n in points:
        if int(n) != n:
            raise ConfigError(f"N must be an integer, got {n}")
        if n % 2:
            raise ConfigError(f"N must be even, got {n}")
        if n < 4:
            raise ConfigError(f"N must be at least 4, got {n}")
    return Grid(tuple((float(a), float(b)) for a, b in bounds),
                tuple(int(n) for n in points))


def forward(values: np.ndarray) -> np.ndarray:
    """Real-space samples ``(2, *points)`` to coefficients ``U~_l``."""
    if values.ndim == 2:
        return sfft.fft(values, axis=1, norm="forward")
    return sfft.fft2(values, axes=(1, 2), norm="forward")


def inverse(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients ``U~_l`` back to real-space samples."""
    if coeffs.ndim == 2:
        return sfft.ifft(coeffs, axis=1, norm="forward")
    return sfft.ifft2(coeffs, axes=(1, 2), norm="forward")


@dataclass
class SpinorField:
    """Two-component complex field on a grid.

    ``values`` has shape ``(2, *grid.points)``: one array per spinor
    component, either node samples (``space="real"``) or Fourier
    coefficients in bin order (``space="fourier"``).
    """

    grid: Grid
    values: np.ndarray
    space: str = REAL

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = (2,) + self.grid.points
        if self.values.shape != expected:
            raise ContractError(
                f"values shape {self.values.shape} != expected {expected}")
        if self.space not in (REAL, FOURIER):
            raise ContractError(f"unknown representation {self.space!r}")

    def norm(self) -> float:
        """Discrete l2 norm, computed in whichever representation is held."""
        s = float(np.sum(np.abs(self.values) ** 2))
        if self.space == REAL:
            return float(np.sqrt(self.grid.cell_volume * s))
        return float(np.sqrt(np.prod(self.grid.lengths) * s))

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.values.copy(), self.space)


def to_fourier(field: SpinorField) -> SpinorField:
    if field.space != REAL:
        raise ContractError("to_fourier expects a real-space field")
    return SpinorField(field.grid, forward(field.values), FOURIER)


def from_fourier(field: SpinorField) -> SpinorField:
    if field.space != FOURIER:
        raise ContractError("from_fourier expects a Fourier-space field")
    return SpinorField(field.grid, inverse(field.values), REAL)


def sample_field(grid: Grid, phi1, phi2) -> SpinorField:
    """Evaluate two callables of the node coordinates into a real-space field."""
    coords = grid.mesh()
    values = np.empty((2,) + grid.points, dtype=complex)
    values[0] = np.broadcast_to(phi1(*coords), grid.points)
    values[1] = np.broadcast_to(phi2(*coords), grid.points)
    return SpinorField(grid, values, REAL)
