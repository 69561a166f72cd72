"""Ground truth for single-step checks.

The semi-discrete system for the Fourier coefficients

    i d/dt Phi~_l = Gamma_l Phi~_l + eps (G(t) Phi)~_l

is integrated with an adaptive 8th-order Runge-Kutta method, and the
variation-of-constants formula

    Phi~_l(t_n + tau) = e^{-i tau Gamma_l} Phi~_l(t_n)
                        - i eps int_0^tau e^{i (w - tau) Gamma_l} F_l(w) dw

is evaluated by adaptive quadrature along that trajectory. Nothing here
goes through the symbol tables, the kernels or ``scipy.fft``, so the
oracle shares no code path with the schemes it checks.
"""
import numpy as np
from scipy.integrate import quad_vec, solve_ivp

from .errors import OracleError
from .grid import Grid


class _Model:
    def __init__(self, pot, grid: Grid):
        self.pot = pot
        self.grid = grid
        mus = np.meshgrid(*(grid.wavenumbers(k) for k in range(grid.dim)),
                          indexing="ij")
        self.mu1 = mus[0]
        self.mu2 = mus[1] if grid.dim == 2 else np.zeros_like(mus[0])
        self.delta = np.sqrt(1.0 + self.mu1 ** 2 + self.mu2 ** 2)
        self.axes = tuple(range(1, grid.dim + 1))
        self.shape = (2,) + grid.points
        self.length = float(np.prod(grid.lengths))

    def gamma(self, v):
        # [[1, mu1 - i mu2], [mu1 + i mu2, -1]]
        return np.stack((v[0] + (self.mu1 - 1j * self.mu2) * v[1],
                         (self.mu1 + 1j * self.mu2) * v[0] - v[1]))

    def propagator(self, s, v):
        """``e^{-i s Gamma} v`` from ``cos(s delta) I - i sin(s delta)/delta Gamma``."""
        return (np.cos(s * self.delta) * v
                - 1j * (np.sin(s * self.delta) / self.delta) * self.gamma(v))

    def source(self, t, coeffs):
        """Coefficients of ``G(t) Phi``."""
        n = self.grid.size
        u = np.fft.ifftn(coeffs, axes=self.axes) * n
        V, A1, A2 = (p.reshape(self.grid.points) for p in self.pot.sample(self.grid, t))
        g = np.empty_like(u)
        g[0] = V * u[0] - A1 * u[1] + 1j * A2 * u[1]
        g[1] = V * u[1] - A1 * u[0] - 1j * A2 * u[0]
        return np.fft.fftn(g, axes=self.axes) / n

    def rhs(self, t, y):
        c = y.reshape(self.shape)
        return (-1j * (self.gamma(c) + self.pot.eps * self.source(t, c))).ravel()

    def l2(self, coeffs):
        return float(np.sqrt(self.length * np.sum(np.abs(coeffs) ** 2)))


def reference_trajectory(coeffs0, pot, grid: Grid, t0: float, t1: float,
                         rtol: float = 1e-13):
    """Dense solution of the semi-discrete system on ``[t0, t1]``.

    Returns a callable ``t -> coefficients``.
    """
    model = _Model(pot, grid)
    scale = max(model.l2(coeffs0), 1e-300)
    sol = solve_ivp(model.rhs, (t0, t1), np.asarray(coeffs0, complex).ravel(),
                    method="DOP853", rtol=rtol, atol=rtol * scale * 1e-2,
                    dense_output=True)
    if not sol.success:
        raise OracleError(f"inner trajectory failed: {sol.message}")
    return lambda t: sol.sol(t).reshape(model.shape)


def duhamel_oracle(coeffs, pot, grid: Grid, t_n: float, tau: float,
                   tol: float = 1e-10) -> np.ndarray:
    """Coefficients at ``t_n + tau`` from the variation-of-constants formula."""
    if tol > 1e-10:
        raise OracleError(f"oracle tolerance must be <= 1e-10, got {tol}")
    model = _Model(pot, grid)
    coeffs = np.asarray(coeffs, dtype=complex)
    free = model.propagator(tau, coeffs)
    if pot.eps == 0:
        return free
    traj = reference_trajectory(coeffs, pot, grid, t_n, t_n + tau)

    def integrand(w):
        val = model.propagator(tau - w, model.source(t_n + w, traj(t_n + w)))
        return np.concatenate((val.real.ravel(), val.imag.ravel()))

    # the l2 norm carries a sqrt(L) factor relative to the coefficient 2-norm
    abs_tol = 0.1 * tol / (pot.eps * np.sqrt(model.length))
    res, err = quad_vec(integrand, 0.0, tau, epsabs=abs_tol, epsrel=0.0,
                        norm="2", limit=200)
    half = res.size // 2
    integral = (res[:half] + 1j * res[half:]).reshape(model.shape)
    if err > abs_tol:
        raise OracleError(f"quadrature error estimate {err:.3g} exceeds {abs_tol:.3g}")
    out = free - 1j * pot.eps * integral
    mismatch = model.l2(out - traj(t_n + tau))
    if mismatch > tol:
        raise OracleError(
            f"quadrature and trajectory disagree by {mismatch:.3g} > {tol:.3g}")
    return out
