"""Electromagnetic potentials, initial data and the built-in scenarios."""
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ContractError
from .expression import Expression
from .grid import Grid, SpinorField, build_grid, sample_field

SQRT3 = np.sqrt(3.0)
HONEYCOMB_DIRECTIONS = ((-1.0, 0.0), (0.5, SQRT3 / 2), (0.5, -SQRT3 / 2))


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Coupling ``eps`` with electric ``V(t, *x)`` and magnetic ``A_j(t, *x)``.

    ``A`` holds one callable per space dimension. ``sup_norms`` optionally
    declares ``(sup|V|, sup|A_1|, ...)`` for stability gating.
    """

    eps: float
    V: Callable
    A: Tuple[Callable, ...]
    time_independent: bool = False
    sup_norms: Optional[Tuple[float, ...]] = None
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.eps <= 1:
            raise ConfigError(f"eps must lie in [0, 1], got {self.eps}")

    @property
    def dim(self) -> int:
        return len(self.A)

    def with_eps(self, eps: float) -> "PotentialSpec":
        return replace(self, eps=float(eps), _cache={})

    def sample(self, grid: Grid, t: float):
        """``(V, A1, A2)`` on the nodes, each flattened to length ``grid.size``.

        ``A2`` is zeros in 1D. Samples are cached for time-independent
        potentials.
        """
        if grid.dim != self.dim:
            raise ContractError(
                f"{self.dim}D potential sampled on a {grid.dim}D grid")
        key = grid if self.time_independent else (grid, float(t))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        coords = grid.mesh()
        parts = [self.V] + list(self.A)
        arrays = []
        for f in parts:
            v = np.asarray(f(t, *coords))
            if np.iscomplexobj(v):
                if np.any(v.imag != 0):
                    raise ConfigError("potentials must be real-valued")
                v = v.real
            arrays.append(np.ascontiguousarray(
                np.broadcast_to(v, grid.points), dtype=float).ravel())
        if len(arrays) == 2:
            arrays.append(np.zeros(grid.size))
        out = tuple(arrays)
        if self.time_independent:
            self._cache.clear()
        self._cache[key] = out
        return out


def zero_potential(dim: int, eps: float = 0.0) -> PotentialSpec:
    zero = lambda t, *x: 0.0  # noqa: E731
    return PotentialSpec(eps, zero, (zero,) * dim, time_independent=True,
                         sup_norms=(0.0,) * (dim + 1))


def constant_potential(V0: float, A0: Sequence[float], eps: float) -> PotentialSpec:
    A0 = tuple(float(a) for a in A0)
    return PotentialSpec(
        eps,
        lambda t, *x, v=float(V0): v,
        tuple((lambda t, *x, a=a: a) for a in A0),
        time_independent=True,
        sup_norms=(abs(V0),) + tuple(abs(a) for a in A0),
    )


def expression_potential(V: str, A: Sequence[str] = ("0",), *,
                         eps: float = 1.0, sup_norms=None) -> PotentialSpec:
    """Build a potential from expression strings (see :mod:`.expression`)."""
    exprs = [Expression(V)] + [Expression(a) for a in A]
    static = all("t" not in e.variables for e in exprs)

    def wrap(e):
        def f(t, *coords):
            shape = np.broadcast(*coords).shape if coords else ()
            return e.sample(t, coords, shape)
        f.expression = e
        return f

    return PotentialSpec(float(eps), wrap(exprs[0]),
                         tuple(wrap(e) for e in exprs[1:]),
                         time_independent=static,
                         sup_norms=None if sup_norms is None else tuple(sup_norms))


# ------------------------------------------------------------------ scenarios

@dataclass(frozen=True, eq=False)
class ScenarioPreset:
    name: str
    description: str
    dim: int
    bounds: Tuple[Tuple[float, float], ...]
    potential: Callable[[float], PotentialSpec]
    phi1: Callable
    phi2: Callable
    default_eps: Tuple[float, ...]
    default_points: int
    source: object = None  # preset name or expression mapping; rebuilds the scenario

    def grid(self, points=None) -> Grid:
        return build_grid(self.dim, self.bounds,
                          self.default_points if points is None else points)

    def initial(self, grid: Grid) -> SpinorField:
        return sample_field(grid, self.phi1, self.phi2)

    def periodic_mismatch(self, samples: int = 201) -> float:
        """Largest jump of the initial data across opposite domain edges."""
        worst = 0.0
        for axis in range(self.dim):
            a, b = self.bounds[axis]
            if self.dim == 1:
                lo, hi = (np.array([a]),), (np.array([b]),)
            else:
                oa, ob = self.bounds[1 - axis]
                s = np.linspace(oa, ob, samples)
                lo = [None, None]
                hi = [None, None]
                lo[axis], hi[axis] = np.full_like(s, a), np.full_like(s, b)
                lo[1 - axis] = hi[1 - axis] = s
            for f in (self.phi1, self.phi2):
                worst = max(worst, float(np.max(np.abs(f(*lo) - f(*hi)))))
        return worst


def _convergence_V(t, x):
    return 2.0 / (2.0 + np.cos(x))


def _convergence_A1(t, x):
    return 1.0 / (2.0 + np.cos(x))


def _convergence_potential(eps: float) -> PotentialSpec:
    return PotentialSpec(float(eps), _convergence_V, (_convergence_A1,),
                         time_independent=True, sup_norms=(2.0, 1.0))


def preset_1d_convergence() -> ScenarioPreset:
    """Smooth 1D benchmark on ``(0, 2 pi)`` with time-independent potentials."""
    return ScenarioPreset(
        name="1d-convergence",
        description="1D convergence benchmark on (0, 2pi): V=2/(2+cos x), "
                    "A1=1/(2+cos x)",
        dim=1,
        bounds=((0.0, 2.0 * np.pi),),
        potential=_convergence_potential,
        phi1=lambda x: 1.0 / (2.0 + np.cos(x)),
        phi2=lambda x: 1.0 / (1.0 + np.sin(x) ** 2),
        default_eps=(1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125),
        default_points=64,
        source="1d-convergence",
    )


def honeycomb_V(t, x, y):
    k = 4.0 * np.pi / SQRT3
    return sum(np.cos(k * (ex * x + ey * y)) for ex, ey in HONEYCOMB_DIRECTIONS)


def _zero(t, *x):
    return 0.0


def _honeycomb_potential(eps: float) -> PotentialSpec:
    return PotentialSpec(float(eps), honeycomb_V, (_zero, _zero),
                         time_independent=True, sup_norms=(3.0, 0.0, 0.0))


def _gaussian(x, y):
    return np.exp(-(x ** 2 + y ** 2) / 2.0)


def preset_2d_honeycomb() -> ScenarioPreset:
    """Gaussian spinor in a honeycomb lattice potential on ``(-15, 15)^2``."""
    return ScenarioPreset(
        name="2d-honeycomb",
        description="2D Gaussian spinor on (-15,15)^2 in a honeycomb lattice "
                    "potential, A=0",
        dim=2,
        bounds=((-15.0, 15.0), (-15.0, 15.0)),
        potential=_honeycomb_potential,
        phi1=_gaussian,
        phi2=_gaussian,
        default_eps=(1.0, 0.001),
        default_points=480,
        source="2d-honeycomb",
    )


PRESETS = {
    "1d-convergence": preset_1d_convergence,
    "2d-honeycomb": preset_2d_honeycomb,
}


def get_preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def expression_scenario(spec: dict) -> ScenarioPreset:
    """Scenario from a mapping of expression strings.

    Keys: ``dim``, ``bounds``, ``V``, ``A`` (list), ``phi1``, ``phi2`` and
    optionally ``name``, ``sup_norms``, ``points``.
    """
    dim = int(spec.get("dim", 1))
    bounds = build_grid(dim, spec["bounds"], 4).bounds
    A = tuple(spec.get("A", ["0"] * dim))
    if len(A) != dim:
        raise ConfigError(f"need {dim} magnetic components, got {len(A)}")
    V = str(spec["V"])
    sup = spec.get("sup_norms")
    phi1 = Expression(spec["phi1"])
    phi2 = Expression(spec["phi2"])
    for e in (phi1, phi2):
        if "t" in e.variables:
            raise ConfigError(f"initial data {e.text!r} must not depend on t")
    names = ("x", "y")[:dim]

    def initial(e):
        def f(*coords):
            shape = np.broadcast(*coords).shape
            return e.sample(0.0, coords, shape)
        return f

    expression_potential(V, A, eps=1.0)  # fail early on syntax errors
    return ScenarioPreset(
        name=str(spec.get("name", "expression")),
        description=f"V={V}; A={list(A)}; phi=({phi1.text}, {phi2.text}) "
                    f"over {names}",
        dim=dim,
        bounds=bounds,
        potential=lambda eps: expression_potential(V, A, eps=eps, sup_norms=sup),
        phi1=initial(phi1),
        phi2=initial(phi2),
        default_eps=(1.0,),
        default_points=int(spec.get("points", 64)),
        source=dict(spec),
    )


def resolve_scenario(scenario) -> ScenarioPreset:
    """Accept a preset, a preset name or an expression mapping."""
    if isinstance(scenario, ScenarioPreset):
        return scenario
    if isinstance(scenario, str):
        return get_preset(scenario)
    if isinstance(scenario, dict):
        return expression_scenario(scenario)
    raise ConfigError(f"cannot build a scenario from {type(scenario).__name__}")


def list_presets() -> str:
    return "\n".join(f"{name}\t{PRESETS[name]().description}"
                     for name in sorted(PRESETS))
