"""Error measurement, convergence sweeps and long-time error growth."""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ContractError, StabilityError
from .grid import REAL, SpinorField
from .potentials import ScenarioPreset, resolve_scenario
from .steppers import Integrator, evolve, steps_for

log = logging.getLogger(__name__)

ROUNDOFF_FLOOR = 1e-12


def l2_error(numerical: SpinorField, reference: SpinorField) -> float:
    """Discrete l2 distance on the numerical grid.

    The reference may live on a finer grid whose point counts are integer
    multiples of the numerical ones; its nodes are then subset.
    """
    if numerical.space != REAL or reference.space != REAL:
        raise ContractError("l2_error compares real-space fields")
    g, r = numerical.grid, reference.grid
    if g.bounds != r.bounds or g.dim != r.dim:
        raise ContractError("fields live on different domains")
    steps = []
    for n, nr in zip(g.points, r.points):
        if nr % n:
            raise ContractError(f"reference N={nr} is not a multiple of N={n}")
        steps.append(nr // n)
    ref = reference.values[(slice(None),) + tuple(slice(None, None, k) for k in steps)]
    diff = numerical.values - ref
    return float(np.sqrt(g.cell_volume * np.sum(np.abs(diff) ** 2)))


def density(field: SpinorField) -> Tuple[np.ndarray, float]:
    """``rho = |phi_1|^2 + |phi_2|^2`` on the nodes and the total mass."""
    if field.space != REAL:
        raise ContractError("density needs a real-space field")
    rho = np.abs(field.values[0]) ** 2 + np.abs(field.values[1]) ** 2
    return rho, float(field.grid.cell_volume * np.sum(rho))


def fit_order(params: Sequence[float], errors: Sequence[float],
              floor: float = ROUNDOFF_FLOOR):
    """Least-squares slope of ``log error`` against ``log param``.

    Points below ``floor`` are dropped. Returns ``(order, residual)`` or
    ``(None, None)`` unless at least 3 points spanning a factor 4 remain.
    """
    p = np.asarray(params, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = np.isfinite(e) & (e >= floor)
    p, e = p[keep], e[keep]
    if p.size < 3 or p.max() / p.min() < 4:
        return None, None
    x, y = np.log(p), np.log(e)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(res[0]) if res.size else 0.0
    return float(coef[0]), residual


# -------------------------------------------------------------------- sweeps

@dataclass
class SweepCell:
    method: str
    eps: float
    h: float
    tau: float
    t_final: float
    error: Optional[float]
    wall_ms: float = 0.0
    status: str = "ok"
    reason: str = ""


@dataclass
class ErrorReport:
    axis: str
    cells: List[SweepCell]
    reference: Dict
    orders: Dict[float, Tuple[Optional[float], Optional[float]]] = field(default_factory=dict)

    def values(self, eps: float):
        """``(param, error)`` pairs along the sweep axis for one ``eps``."""
        key = "h" if self.axis == "h" else "tau"
        return [(getattr(c, key), c.error) for c in self.cells
                if c.eps == eps and c.status == "ok"]

    @property
    def eps_values(self):
        return sorted({c.eps for c in self.cells}, reverse=True)

    def decay_ratios(self, eps: float) -> List[float]:
        """``error(h) / error(h/2)`` along a spatial row, coarse to fine."""
        pts = sorted(self.values(eps), reverse=True)
        return [a[1] / b[1] for a, b in zip(pts, pts[1:])]

    def uniformity(self, tau: float) -> Optional[float]:
        """Max/min error across eps at one step size."""
        errs = [c.error for c in self.cells
                if c.status == "ok" and math.isclose(c.tau, tau)]
        if len(errs) < 2 or min(errs) <= 0:
            return None
        return max(errs) / min(errs)

    def table(self):
        """Rows ``(eps, [errors...])`` and the column parameters, Table-1 style."""
        key = "h" if self.axis == "h" else "tau"
        cols = sorted({getattr(c, key) for c in self.cells}, reverse=True)
        rows = []
        for eps in self.eps_values:
            lookup = {getattr(c, key): c for c in self.cells if c.eps == eps}
            rows.append((eps, [lookup[p].error if p in lookup else None for p in cols]))
        return cols, rows


def _run_cell(job):
    (scenario, method, eps, points, tau, T, override, ref_values, ref_points) = job
    preset = resolve_scenario(scenario)
    grid = preset.grid(points)
    pot = preset.potential(eps)
    h = grid.spacing[0]
    start = time.perf_counter()
    try:
        out = evolve(method, pot, preset.initial(grid), tau, T, override=override)
    except StabilityError as exc:
        return SweepCell(method, eps, h, tau, T, None, 0.0, "rejected", str(exc))
    wall = (time.perf_counter() - start) * 1e3
    ref = SpinorField(preset.grid(ref_points), ref_values, REAL)
    return SweepCell(method, eps, h, tau, T, l2_error(out, ref), wall)


def reference_solution(preset: ScenarioPreset, eps: float, points, tau: float,
                       T: float) -> SpinorField:
    """Time-splitting reference at ``(points, tau)`` up to ``T``."""
    grid = preset.grid(points)
    return evolve("tsfp", preset.potential(eps), preset.initial(grid), tau, T)


def _horizon(eps, T0, T):
    if T is not None:
        return float(T)
    if eps == 0:
        raise ConfigError("horizon T0/eps needs eps > 0; give T explicitly")
    return T0 / eps


def _execute(jobs: list, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [_run_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, jobs))


def spatial_sweep(method: str, preset, eps_list: Sequence[float],
                  points_list: Sequence[int], tau: float, *, T0: float = 2.0,
                  T: Optional[float] = None, ref_points: int = 128,
                  ref_tau: Optional[float] = None, override: bool = False,
                  workers: int = 1) -> ErrorReport:
    """Spatial errors over ``(eps, N)`` at a small fixed step ``tau``.

    The horizon is ``T0/eps`` unless ``T`` is given. References are
    time-splitting runs at ``(ref_points, ref_tau)``, ``ref_tau`` defaulting
    to ``tau/10``.
    """
    preset = resolve_scenario(preset)
    ref_tau = tau / 10 if ref_tau is None else ref_tau
    cells = []
    for eps in eps_list:
        horizon = _horizon(eps, T0, T)
        ref = reference_solution(preset, eps, ref_points, ref_tau, horizon)
        jobs = [(preset.source, method, eps, n, tau, horizon, override,
                 ref.values, ref_points) for n in points_list]
        cells.extend(_execute(jobs, workers))
    report = ErrorReport("h", cells, {"method": "tsfp", "points": ref_points,
                                      "tau": ref_tau})
    for eps in eps_list:
        report.orders[eps] = fit_order(*zip(*report.values(eps))) \
            if report.values(eps) else (None, None)
    return report


def temporal_sweep(method: str, preset, eps_list: Sequence[float],
                   tau_list: Sequence[float], *, points: int = 128,
                   T0: float = 2.0, T: Optional[float] = None,
                   ref_points: Optional[int] = None,
                   ref_tau: Optional[float] = None, override: bool = False,
                   workers: int = 1) -> ErrorReport:
    """Temporal errors over ``(eps, tau)`` on a fine grid.

    ``ref_tau`` defaults to ``min(tau_list)/10``; the reference grid defaults
    to the numerical one.
    """
    preset = resolve_scenario(preset)
    ref_points = points if ref_points is None else ref_points
    ref_tau = min(tau_list) / 10 if ref_tau is None else ref_tau
    cells = []
    for eps in eps_list:
        horizon = _horizon(eps, T0, T)
        ref = reference_solution(preset, eps, ref_points, ref_tau, horizon)
        jobs = [(preset.source, method, eps, points, tau, horizon, override,
                 ref.values, ref_points) for tau in tau_list]
        cells.extend(_execute(jobs, workers))
    report = ErrorReport("tau", cells, {"method": "tsfp", "points": ref_points,
                                        "tau": ref_tau})
    for eps in eps_list:
        vals = report.values(eps)
        report.orders[eps] = fit_order(*zip(*vals)) if vals else (None, None)
    return report


# ------------------------------------------------------------ growth profile

@dataclass
class GrowthProfile:
    """Error history and the detected linear-to-exponential breakpoint.

    ``t_star`` comes from a two-segment least-squares fit (linear in the
    error, then linear in its logarithm); it is this package's working
    definition, not a unique property of the data.
    """

    times: np.ndarray
    errors: np.ndarray
    t_star: Optional[float]
    linear_residual: Optional[float] = None
    exponential_residual: Optional[float] = None
    growth_rate: Optional[float] = None
    note: str = ""


def detect_breakpoint(times, errors, min_segment: int = 3,
                      floor: float = ROUNDOFF_FLOOR) -> GrowthProfile:
    """Exhaustive two-segment fit over sample indices.

    The early segment is a straight line in the error, fitted and scored by
    relative residuals; the late segment is a straight line in the log of
    the error. Both scores are invariant under scaling all errors by a
    constant, and so is the breakpoint. A late segment that does not grow by
    at least a factor ``e`` beyond the early line is not called exponential;
    ``t*`` is then the final time.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(errors, dtype=float)
    if e.size < 2 * min_segment or not np.any(e > floor):
        return GrowthProfile(t, e, None, note="errors at roundoff floor; t* undefined")
    e = np.maximum(e, floor)
    logs = np.log(e)
    fits = []
    for k in range(min_segment, t.size - min_segment + 1):
        r1, line = _relative_line(t[:k], e[:k])
        coef = np.polyfit(t[k:], logs[k:], 1)
        r2 = float(np.sum((np.polyval(coef, t[k:]) - logs[k:]) ** 2))
        fits.append((r1 + r2, k, r1, r2, coef[0], line))
    # residuals are dimensionless; near-ties go to the earliest breakpoint
    lowest = min(f[0] for f in fits)
    _, k, r1, r2, rate, line = next(f for f in fits
                                    if f[0] <= lowest * (1 + 1e-9) + 1e-20)
    excess = logs[-1] - np.log(max(np.polyval(line, t[-1]), floor))
    if rate <= 0 or excess < 1.0:
        r1, _ = _relative_line(t, e)
        return GrowthProfile(t, e, float(t[-1]), r1, None, None,
                             note="no exponential regime detected; t* = T")
    return GrowthProfile(t, e, float(t[k]), r1, r2, float(rate))


def _relative_line(x, y):
    """Straight-line fit minimising relative deviations; returns (residual, coef)."""
    w = 1.0 / y
    coef = np.polyfit(x, y, 1, w=w)
    return float(np.sum(((np.polyval(coef, x) - y) * w) ** 2)), coef


def growth_profile(method: str, preset, eps: float, points, tau: float,
                   T: float, *, stride: int = 10, ref_factor: int = 10,
                   ref_points=None, override: bool = False) -> GrowthProfile:
    """Error of ``method`` against a time-splitting run with step ``tau/ref_factor``.

    Both runs advance in lockstep and the error is sampled every ``stride``
    steps of the scheme under test.
    """
    if ref_factor < 10:
        raise ConfigError("the reference step must be at most tau/10")
    preset = resolve_scenario(preset)
    grid = preset.grid(points)
    ref_grid = preset.grid(points if ref_points is None else ref_points)
    pot = preset.potential(eps)
    nsteps = steps_for(T, tau)
    run = Integrator(method, pot, grid, tau, override=override, T=T)
    run.start(preset.initial(grid))
    ref = Integrator("tsfp", pot, ref_grid, tau / ref_factor)
    ref.start(preset.initial(ref_grid))
    times, errors = [], []
    done = 0
    while done < nsteps:
        chunk = min(stride, nsteps - done)
        run.advance(chunk)
        ref.advance(chunk * ref_factor)
        done += chunk
        times.append(done * tau)
        errors.append(l2_error(run.field(), ref.field()))
    return detect_breakpoint(times, errors)
