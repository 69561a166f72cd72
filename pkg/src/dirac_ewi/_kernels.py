"""Per-mode and per-node inner loops.

Every kernel exists twice: a vectorized numpy version and a numba ``@njit``
loop. Both operate on flattened arrays: spinors are ``(2, M)`` complex,
per-mode coefficients and per-node potentials are length ``M``.

The backend is picked once at import from ``DIRAC_EWI_BACKEND``
(``numba`` or ``numpy``). Without the variable numba is used when it imports.
"""
import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None


# ---------------------------------------------------------------- numpy path

def _np_gamma(mu1, mu2, v):
    c = mu1 - 1j * mu2
    return np.stack((v[0] + c * v[1], np.conj(c) * v[0] - v[1]))


def _np_symbol_apply(a, b, mu1, mu2, v):
    return a * v + b * _np_gamma(mu1, mu2, v)


def _np_ewi_update(phi, g, g_prev, ea, eb, q1a, q1b, q2a, q2b, mu1, mu2,
                   eps, tau, first):
    ie = -1j * eps
    if first:
        left = ea * phi + ie * (q1a * g)
        right = eb * phi + ie * (q1b * g)
    else:
        d = (g - g_prev) / tau
        left = ea * phi + ie * (q1a * g + q2a * d)
        right = eb * phi + ie * (q1b * g + q2b * d)
    return left + _np_gamma(mu1, mu2, right)


def _np_sewi_update(phi, phi_prev, g, sb, w, mu1, mu2, eps):
    return phi_prev - 2j * _np_gamma(mu1, mu2, sb * phi) - 1j * eps * (w * g)


def _np_apply_potential(V, A1, A2, phi):
    return np.stack((
        V * phi[0] - (A1 - 1j * A2) * phi[1],
        V * phi[1] - (A1 + 1j * A2) * phi[0],
    ))


def _np_potential_flow(V, A1, A2, theta, phi):
    r = np.hypot(A1, A2)
    phase = np.exp(-1j * theta * V)
    c = np.cos(theta * r)
    s = theta * np.sinc(theta * r / np.pi)
    return np.stack((
        phase * (c * phi[0] + 1j * s * (A1 - 1j * A2) * phi[1]),
        phase * (c * phi[1] + 1j * s * (A1 + 1j * A2) * phi[0]),
    ))


numpy_kernels = SimpleNamespace(
    name="numpy",
    symbol_apply=_np_symbol_apply,
    ewi_update=_np_ewi_update,
    sewi_update=_np_sewi_update,
    apply_potential=_np_apply_potential,
    potential_flow=_np_potential_flow,
)


# ---------------------------------------------------------------- numba path

def _build_numba_kernels():
    njit = numba.njit(cache=True, fastmath=False)

    @njit
    def symbol_apply(a, b, mu1, mu2, v):
        m = v.shape[1]
        out = np.empty_like(v)
        for k in range(m):
            c = mu1[k] - 1j * mu2[k]
            v0 = v[0, k]
            v1 = v[1, k]
            out[0, k] = a[k] * v0 + b[k] * (v0 + c * v1)
            out[1, k] = a[k] * v1 + b[k] * (c.conjugate() * v0 - v1)
        return out

    @njit
    def ewi_update(phi, g, g_prev, ea, eb, q1a, q1b, q2a, q2b, mu1, mu2,
                   eps, tau, first):
        m = phi.shape[1]
        out = np.empty_like(phi)
        ie = -1j * eps
        for k in range(m):
            c = mu1[k] - 1j * mu2[k]
            if first:
                l0 = ea[k] * phi[0, k] + ie * (q1a[k] * g[0, k])
                l1 = ea[k] * phi[1, k] + ie * (q1a[k] * g[1, k])
                r0 = eb[k] * phi[0, k] + ie * (q1b[k] * g[0, k])
                r1 = eb[k] * phi[1, k] + ie * (q1b[k] * g[1, k])
            else:
                d0 = (g[0, k] - g_prev[0, k]) / tau
                d1 = (g[1, k] - g_prev[1, k]) / tau
                l0 = ea[k] * phi[0, k] + ie * (q1a[k] * g[0, k] + q2a[k] * d0)
                l1 = ea[k] * phi[1, k] + ie * (q1a[k] * g[1, k] + q2a[k] * d1)
                r0 = eb[k] * phi[0, k] + ie * (q1b[k] * g[0, k] + q2b[k] * d0)
                r1 = eb[k] * phi[1, k] + ie * (q1b[k] * g[1, k] + q2b[k] * d1)
            out[0, k] = l0 + (r0 + c * r1)
            out[1, k] = l1 + (c.conjugate() * r0 - r1)
        return out

    @njit
    def sewi_update(phi, phi_prev, g, sb, w, mu1, mu2, eps):
        m = phi.shape[1]
        out = np.empty_like(phi)
        for k in range(m):
            c = mu1[k] - 1j * mu2[k]
            r0 = sb[k] * phi[0, k]
            r1 = sb[k] * phi[1, k]
            out[0, k] = (phi_prev[0, k] - 2j * (r0 + c * r1)
                         - 1j * eps * (w[k] * g[0, k]))
            out[1, k] = (phi_prev[1, k] - 2j * (c.conjugate() * r0 - r1)
                         - 1j * eps * (w[k] * g[1, k]))
        return out

    @njit
    def apply_potential(V, A1, A2, phi):
        m = phi.shape[1]
        out = np.empty_like(phi)
        for k in range(m):
            am = A1[k] - 1j * A2[k]
            out[0, k] = V[k] * phi[0, k] - am * phi[1, k]
            out[1, k] = V[k] * phi[1, k] - am.conjugate() * phi[0, k]
        return out

    @njit
    def potential_flow(V, A1, A2, theta, phi):
        m = phi.shape[1]
        out = np.empty_like(phi)
        for k in range(m):
            r = np.hypot(A1[k], A2[k])
            x = theta * r
            if x == 0.0:
                s = theta
            else:
                s = np.sin(x) / r
            c = np.cos(x)
            phase = np.exp(-1j * theta * V[k])
            am = A1[k] - 1j * A2[k]
            out[0, k] = phase * (c * phi[0, k] + 1j * s * am * phi[1, k])
            out[1, k] = phase * (c * phi[1, k]
                                 + 1j * s * am.conjugate() * phi[0, k])
        return out

    return SimpleNamespace(
        name="numba",
        symbol_apply=symbol_apply,
        ewi_update=ewi_update,
        sewi_update=sewi_update,
        apply_potential=apply_potential,
        potential_flow=potential_flow,
    )


numba_kernels = _build_numba_kernels() if numba is not None else None


def _select():
    wanted = os.environ.get("DIRAC_EWI_BACKEND", "").strip().lower()
    if wanted == "numpy":
        return numpy_kernels
    if wanted not in ("", "numba"):
        raise ValueError(
            f"DIRAC_EWI_BACKEND must be 'numba' or 'numpy', got {wanted!r}")
    if numba_kernels is None:
        if wanted == "numba":
            raise ImportError("DIRAC_EWI_BACKEND=numba but numba is missing")
        return numpy_kernels
    return numba_kernels


active = _select()
BACKEND = active.name
