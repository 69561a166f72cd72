"""Exponential wave integrators and the time-splitting reference scheme.

All schemes advance Fourier coefficients ``(2, *points)`` in FFT bin order.
The potential term ``G = V I - sum_j A_j sigma_j`` is applied on the nodes
and transformed back, so each step costs one inverse/forward FFT pair.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import ConfigError, ContractError
from .grid import REAL, Grid, SpinorField, forward, inverse, to_fourier
from .potentials import PotentialSpec
from .stability import check_step
from .symbols import SymbolTable

log = logging.getLogger(__name__)

METHODS = ("ewi-fp", "sewi-fp", "tsfp")


@dataclass
class StepperState:
    """Fourier-space state at ``t = t0 + n * tau``.

    ``phi_prev`` and ``g_prev`` hold the previous coefficients and the
    coefficients of ``G(t_{n-1}) Phi^{n-1}``; both are absent at ``n = 0``.
    """

    phi: np.ndarray
    tau: float
    n: int = 0
    t0: float = 0.0
    phi_prev: Optional[np.ndarray] = None
    g_prev: Optional[np.ndarray] = None

    @property
    def t(self) -> float:
        return self.t0 + self.n * self.tau


def _flat(a):
    return np.ascontiguousarray(a.reshape(2, -1))


def g_hat(pot: PotentialSpec, grid: Grid, t: float, phi: np.ndarray) -> np.ndarray:
    """Fourier coefficients of ``G(t) Phi`` from the coefficients of ``Phi``."""
    V, A1, A2 = pot.sample(grid, t)
    real = _flat(inverse(phi))
    out = _kernels.active.apply_potential(V, A1, A2, real)
    return forward(out.reshape(phi.shape))


def apply_G(pot: PotentialSpec, t: float, field: SpinorField) -> SpinorField:
    """Pointwise ``(V I - sum_j A_j sigma_j) Phi`` of a real-space field."""
    if field.space != REAL:
        raise ContractError("apply_G expects a real-space field")
    V, A1, A2 = pot.sample(field.grid, t)
    out = _kernels.active.apply_potential(V, A1, A2, _flat(field.values))
    return SpinorField(field.grid, out.reshape(field.values.shape), REAL)


def _ewi_kernel(state, g, g_prev, table, eps, first):
    k = _kernels.active
    ea, eb = table.coeffs("exp")
    q1a, q1b = table.coeffs("q1")
    q2a, q2b = table.coeffs("q2")
    out = k.ewi_update(_flat(state.phi), _flat(g), _flat(g_prev), ea, eb,
                       q1a, q1b, q2a, q2b, table.mu1, table.mu2,
                       float(eps), float(table.tau), first)
    return out.reshape(state.phi.shape)


def _check_table(state, table):
    if table.tau != state.tau:
        raise ContractError(
            f"symbol table built for tau={table.tau}, state has tau={state.tau}")


def ewi_first_step(state: StepperState, pot: PotentialSpec,
                   table: SymbolTable) -> StepperState:
    """Shared first step of both exponential integrators (frozen source term)."""
    if state.n != 0:
        raise ContractError(f"first step called at n={state.n}")
    _check_table(state, table)
    g0 = g_hat(pot, table.grid, state.t, state.phi)
    phi1 = _ewi_kernel(state, g0, g0, table, pot.eps, True)
    return replace(state, phi=phi1, n=1, phi_prev=state.phi, g_prev=g0)


def ewi_step(state: StepperState, pot: PotentialSpec,
             table: SymbolTable) -> StepperState:
    """One-step exponential integrator with a linearized source term (n >= 1)."""
    if state.g_prev is None:
        raise ContractError("ewi_step needs the previous G-coefficients")
    _check_table(state, table)
    g = g_hat(pot, table.grid, state.t, state.phi)
    new = _ewi_kernel(state, g, state.g_prev, table, pot.eps, False)
    return replace(state, phi=new, n=state.n + 1, phi_prev=state.phi, g_prev=g)


def sewi_step(state: StepperState, pot: PotentialSpec,
              table: SymbolTable) -> StepperState:
    """Symmetric two-step exponential integrator (n >= 1).

    A negative ``tau`` in both state and table runs the recurrence backwards.
    """
    if state.phi_prev is None:
        raise ContractError("sewi_step needs the previous coefficients")
    _check_table(state, table)
    g = g_hat(pot, table.grid, state.t, state.phi)
    _, sb = table.coeffs("sin")
    w = 2.0 * np.sin(table.tau * table.delta) / table.delta
    out = _kernels.active.sewi_update(
        _flat(state.phi), _flat(state.phi_prev), _flat(g), sb, w,
        table.mu1, table.mu2, float(pot.eps))
    return replace(state, phi=out.reshape(state.phi.shape), n=state.n + 1,
                   phi_prev=state.phi, g_prev=g)


def tsfp_step(state: StepperState, pot: PotentialSpec,
              half_table: SymbolTable) -> StepperState:
    """Strang splitting: half free flow, exact potential flow, half free flow.

    The potential flow freezes ``G`` at the midpoint ``t_n + tau/2``.
    """
    if not math.isclose(half_table.tau, state.tau / 2, rel_tol=1e-15):
        raise ContractError("tsfp_step needs a table built for tau/2")
    grid = half_table.grid
    phi = half_table.apply("exp", state.phi)
    V, A1, A2 = pot.sample(grid, state.t + state.tau / 2)
    real = _flat(inverse(phi))
    real = _kernels.active.potential_flow(V, A1, A2, pot.eps * state.tau, real)
    phi = half_table.apply("exp", forward(real.reshape(phi.shape)))
    return replace(state, phi=phi, n=state.n + 1, phi_prev=state.phi)


class Integrator:
    """Drives one scheme from an initial field.

    >>> integ = Integrator("ewi-fp", pot, grid, tau=0.01)
    >>> integ.start(phi0)
    >>> integ.advance(100)
    """

    def __init__(self, method: str, pot: PotentialSpec, grid: Grid, tau: float,
                 *, override: bool = False, T: Optional[float] = None):
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; known: {METHODS}")
        if not tau > 0:
            raise ConfigError(f"tau must be positive, got {tau}")
        self.method = method
        self.pot = pot
        self.grid = grid
        self.tau = float(tau)
        self.gate = check_step(method, self.tau, grid, pot, T=T, override=override)
        if method == "tsfp":
            self.table = SymbolTable(grid, self.tau / 2)
        else:
            self.table = SymbolTable(grid, self.tau)
        self.state = None

    def start(self, phi0: SpinorField, t0: float = 0.0):
        if phi0.grid != self.grid:
            raise ContractError("initial field lives on a different grid")
        coeffs = to_fourier(phi0).values if phi0.space == REAL else phi0.values
        self.state = StepperState(coeffs.copy(), self.tau, 0, float(t0))
        return self

    def step(self):
        s = self.state
        if self.method == "tsfp":
            self.state = tsfp_step(s, self.pot, self.table)
        elif s.n == 0:
            self.state = ewi_first_step(s, self.pot, self.table)
        elif self.method == "ewi-fp":
            self.state = ewi_step(s, self.pot, self.table)
        else:
            self.state = sewi_step(s, self.pot, self.table)
        return self.state

    def advance(self, nsteps: int, callback: Optional[Callable] = None):
        for _ in range(int(nsteps)):
            self.step()
            if callback is not None:
                callback(self.state)
        return self.state

    @property
    def t(self) -> float:
        return self.state.t

    def field(self) -> SpinorField:
        return SpinorField(self.grid, inverse(self.state.phi), REAL)


def steps_for(T: float, tau: float) -> int:
    """Number of steps reaching ``T`` exactly; raise if ``T/tau`` is not integral."""
    n = int(round(T / tau))
    if n < 0 or abs(n * tau - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigError(f"horizon {T} is not an integer multiple of tau={tau}")
    return n


def evolve(method: str, pot: PotentialSpec, phi0: SpinorField, tau: float,
           T: float, *, override: bool = False,
           callback: Optional[Callable] = None) -> SpinorField:
    """Run ``method`` from ``phi0`` to time ``T`` and return the real-space field."""
    integ = Integrator(method, pot, phi0.grid, tau, override=override, T=T)
    integ.start(phi0)
    integ.advance(steps_for(T, tau), callback)
    return integ.field()
