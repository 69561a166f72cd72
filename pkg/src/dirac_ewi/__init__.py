"""Exponential wave integrators for the Dirac equation with small potentials."""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .analysis import (ErrorReport, GrowthProfile, density, detect_breakpoint,
                       fit_order, growth_profile, l2_error, spatial_sweep,
                       temporal_sweep)
from .errors import ConfigError, ContractError, OracleError, StabilityError
from .grid import Grid, SpinorField, build_grid, from_fourier, to_fourier
from .oracle import duhamel_oracle
from .potentials import (PotentialSpec, ScenarioPreset, expression_potential,
                         get_preset, list_presets, preset_1d_convergence,
                         preset_2d_honeycomb)
from .stability import GateResult, check_step, spectral_radii, stability_gate
from .steppers import (Integrator, StepperState, apply_G, evolve, ewi_first_step,
                       ewi_step, sewi_step, tsfp_step)
from .symbols import SymbolTable, gautschi_weights, symbol_function

__all__ = [
    "BACKEND", "ConfigError", "ContractError", "ErrorReport", "Grid",
    "GateResult", "GrowthProfile", "Integrator", "OracleError", "PotentialSpec",
    "ScenarioPreset", "SpinorField", "StabilityError", "StepperState",
    "SymbolTable", "apply_G", "build_grid", "check_step", "density",
    "detect_breakpoint", "duhamel_oracle", "evolve", "ewi_first_step", "ewi_step",
    "expression_potential", "fit_order", "from_fourier", "gautschi_weights",
    "get_preset", "growth_profile", "l2_error", "list_presets",
    "preset_1d_convergence", "preset_2d_honeycomb", "sewi_step", "spatial_sweep",
    "spectral_radii", "stability_gate", "symbol_function", "temporal_sweep",
    "to_fourier", "tsfp_step",
]
