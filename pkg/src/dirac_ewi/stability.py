"""Step-size gates and per-mode amplification (companion) maps.

The symmetric scheme is gated by

    tau < min( pi / (3 delta_max), (2 - sqrt 3) / (2 C) ),

where ``delta_max = sqrt(1 + sum_k (pi/h_k)^2)`` is the largest symbol
eigenvalue on the grid and ``C`` is the sum of the potential sup-norms. In
1D the first term equals ``h pi / (3 sqrt(h^2 + pi^2))``. The bound is proved
for constant potentials; for variable ones it is a heuristic.

The one-step integrator only carries the qualitative ``tau <= 1`` condition,
which is warned about rather than enforced.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import StabilityError
from .grid import Grid
from .symbols import PAULI, SymbolTable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GateResult:
    method: str
    tau: float
    bound: float
    ok: bool
    reason: str = ""
    heuristic: bool = False


def _as_tuple(x):
    if np.isscalar(x):
        return (float(x),)
    return tuple(float(v) for v in x)


def sewi_bound(h: Union[float, Sequence[float]], C: float):
    """Return ``(bound, resolution_term, potential_term)``."""
    h = _as_tuple(h)
    delta_max = math.sqrt(1.0 + sum((math.pi / hk) ** 2 for hk in h))
    resolution = math.pi / (3.0 * delta_max)
    potential = math.inf if C == 0 else (2.0 - math.sqrt(3.0)) / (2.0 * C)
    return min(resolution, potential), resolution, potential


def stability_gate(method: str, tau: float, h, pot_bounds,
                   heuristic: bool = False) -> GateResult:
    """Evaluate a scheme's step-size condition; rejection is a value.

    ``pot_bounds`` is ``C`` itself or the sup-norms ``(|V|, |A_1|, ...)``.
    """
    C = float(sum(abs(b) for b in _as_tuple(pot_bounds)))
    if method == "sewi-fp":
        bound, resolution, potential = sewi_bound(h, C)
        if 0 < tau < bound:
            return GateResult(method, tau, bound, True, heuristic=heuristic)
        which = ("resolution term pi/(3 delta_max)" if resolution <= potential
                 else f"potential term (2-sqrt3)/(2C) with C={C:.6g}")
        reason = (f"sEWI-FP needs 0 < tau < {bound:.6g} ({which}); "
                  f"got tau={tau:.6g}")
        return GateResult(method, tau, bound, False, reason, heuristic)
    if method == "ewi-fp":
        if 0 < tau <= 1.0:
            return GateResult(method, tau, 1.0, True, heuristic=heuristic)
        return GateResult(method, tau, 1.0, False,
                          f"EWI-FP is analysed for tau <= 1; got tau={tau:.6g}",
                          heuristic)
    # time splitting is unconditionally stable
    return GateResult(method, tau, math.inf, tau > 0,
                      "" if tau > 0 else "tau must be positive")


def estimate_sup_norms(pot, grid: Grid, T: float = 0.0, refine: int = 4):
    """Sample ``|V|`` and ``|A_j|`` on a refined grid at ``t in {0, T/2, T}``."""
    fine = grid.refine(refine)
    times = (0.0,) if pot.time_independent else (0.0, T / 2, T)
    best = np.zeros(grid.dim + 1)
    for t in times:
        parts = pot.sample(fine, t)[: grid.dim + 1]
        best = np.maximum(best, [np.max(np.abs(p)) for p in parts])
    return tuple(float(b) for b in best)


def evaluate_gate(method: str, tau: float, grid: Grid, pot, *,
                  T: Optional[float] = None) -> GateResult:
    """Gate a planned run without acting on the outcome."""
    if pot.sup_norms is not None:
        norms = pot.sup_norms
    else:
        norms = estimate_sup_norms(pot, grid, T or 0.0)
    # the bound is proved for constant potentials only
    heuristic = not (pot.time_independent and _is_constant(pot, grid))
    return stability_gate(method, tau, grid.spacing, norms, heuristic=heuristic)


def check_step(method: str, tau: float, grid: Grid, pot, *,
               T: Optional[float] = None, override: bool = False) -> GateResult:
    """Gate a run; raise for sEWI-FP rejections unless ``override``."""
    result = evaluate_gate(method, tau, grid, pot, T=T)
    if result.ok:
        return result
    if method == "sewi-fp" and not override:
        raise StabilityError(result.reason, result.bound)
    if method == "sewi-fp":
        log.warning("stability gate overridden: %s", result.reason)
    else:
        warnings.warn(result.reason, RuntimeWarning, stacklevel=3)
    return result


def _is_constant(pot, grid):
    parts = pot.sample(grid, 0.0)
    return all(np.ptp(p) == 0 for p in parts)


# ------------------------------------------------------------ companion maps

def _constant_G(V0, A0):
    G = V0 * np.eye(2, dtype=complex)
    for a, s in zip(A0, PAULI):
        G = G - a * s
    return G


def _per_mode(table: SymbolTable, name: str) -> np.ndarray:
    """``f(Gamma_l)`` for every mode as an ``(M, 2, 2)`` array."""
    a, b = table.coeffs(name)
    gam = (table.mu1[:, None, None] * PAULI[0] + table.mu2[:, None, None] * PAULI[1]
           + PAULI[2])
    return a[:, None, None] * np.eye(2) + b[:, None, None] * gam


def companion_matrices(method: str, table: SymbolTable, V0: float,
                       A0: Sequence[float], eps: float) -> np.ndarray:
    """Per-mode 4x4 maps ``(Phi^n, Phi^{n-1}) -> (Phi^{n+1}, Phi^n)`` for
    spatially constant, time-independent potentials (``n >= 1``)."""
    G = _constant_G(V0, A0)
    M = table.mu1.size
    eye = np.broadcast_to(np.eye(2, dtype=complex), (M, 2, 2))
    if method == "ewi-fp":
        E = _per_mode(table, "exp")
        Q1 = _per_mode(table, "q1")
        Q2 = _per_mode(table, "q2") / table.tau
        top_left = E - 1j * eps * (Q1 @ G) - 1j * eps * (Q2 @ G)
        top_right = 1j * eps * (Q2 @ G)
    elif method == "sewi-fp":
        S = _per_mode(table, "sin")
        w = (np.sin(table.tau * table.delta) / table.delta)[:, None, None]
        top_left = -2j * S - 2j * eps * w * G
        top_right = eye
    else:
        raise ValueError(f"no companion map for {method!r}")
    out = np.zeros((M, 4, 4), dtype=complex)
    out[:, :2, :2] = top_left
    out[:, :2, 2:] = top_right
    out[:, 2:, :2] = eye
    return out


def spectral_radii(method: str, table: SymbolTable, V0: float,
                   A0: Sequence[float], eps: float) -> np.ndarray:
    """Largest ``|xi_l|`` per mode."""
    mats = companion_matrices(method, table, V0, A0, eps)
    return np.max(np.abs(np.linalg.eigvals(mats)), axis=1)
