"""Config-driven command line entry point.

Verbs::

    dirac-ewi run CONFIG        single run or sweep, whatever CONFIG describes
    dirac-ewi sweep CONFIG      same, but CONFIG must contain a sweep block
    dirac-ewi validate CONFIG   schema, grid and stability checks only
    dirac-ewi presets           list the built-in scenarios

CONFIG is a YAML file (JSON works too, including a ``manifest.json`` written
by an earlier run). Relative output directories are resolved against
``$DIRAC_EWI_OUTPUT_ROOT`` when it is set. See the README for every key and
its default.

Exit codes: 0 success, 2 invalid configuration, 3 stability-gate rejection.
"""
import argparse
import copy
import hashlib
import json
import logging
import math
import os
import sys

import jsonschema
import yaml

from . import __version__, _kernels
from .analysis import density, growth_profile, spatial_sweep, temporal_sweep
from .errors import ConfigError, StabilityError
from .io import fmt, write_csv, write_json, write_snapshot
from .potentials import list_presets, resolve_scenario
from .stability import evaluate_gate
from .steppers import METHODS, Integrator, steps_for

log = logging.getLogger("dirac_ewi")

OUTPUT_ROOT_ENV = "DIRAC_EWI_OUTPUT_ROOT"
HORIZON_CAP = 8.0
EXIT_CONFIG = 2
EXIT_GATE = 3

_positive = {"type": "number", "exclusiveMinimum": 0}
_points = {"oneOf": [{"type": "integer", "minimum": 4},
                     {"type": "array", "items": {"type": "integer", "minimum": 4},
                      "minItems": 1, "maxItems": 2}]}
_methods = {"oneOf": [{"enum": list(METHODS)},
                      {"type": "array", "items": {"enum": list(METHODS)},
                       "minItems": 1, "uniqueItems": True}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario", "method", "tau"],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
        "scenario": {"oneOf": [
            {"type": "string"},
            {"type": "object",
             "additionalProperties": False,
             "required": ["bounds", "V", "phi1", "phi2"],
             "properties": {
                 "name": {"type": "string"},
                 "dim": {"enum": [1, 2]},
                 "bounds": {"type": "array"},
                 "V": {"type": "string"},
                 "A": {"type": "array", "items": {"type": "string"}},
                 "phi1": {"type": "string"},
                 "phi2": {"type": "string"},
                 "sup_norms": {"type": "array", "items": {"type": "number", "minimum": 0}},
                 "points": {"type": "integer"},
             }},
        ]},
        "method": _methods,
        "eps": {"type": "number", "minimum": 0, "maximum": 1},
        "points": _points,
        "tau": _positive,
        "T": _positive,
        "T0_over_eps": _positive,
        "snapshots": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "output": {"type": "string"},
        "override_stability": {"type": "boolean"},
        "jobs": {"type": "integer", "minimum": 1},
        "long": {"type": "boolean"},
        "reference": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"points": {"type": "integer", "minimum": 4},
                           "tau": _positive,
                           "factor": {"type": "integer", "minimum": 10}},
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "eps"],
            "properties": {
                "kind": {"enum": ["spatial", "temporal", "growth"]},
                "eps": {"type": "array", "minItems": 1,
                        "items": {"type": "number", "minimum": 0, "maximum": 1}},
                "points": {"type": "array", "minItems": 1,
                           "items": {"type": "integer", "minimum": 4}},
                "tau": {"type": "array", "minItems": 1, "items": _positive},
                "stride": {"type": "integer", "minimum": 1},
            },
        },
    },
    "not": {"required": ["T", "T0_over_eps"]},
}

# keys that do not change any number in the outputs
_UNHASHED = ("output", "jobs")


def _path(error) -> str:
    parts = ["config"]
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def validate_schema(raw) -> None:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    messages = []
    for e in errors:
        msg = e.message
        if e.validator == "not" and not e.absolute_path:
            msg = "give either T or T0_over_eps, not both"
        messages.append(f"{_path(e)}: {msg}")
    if messages:
        raise ConfigError("; ".join(messages))


def normalize(raw: dict) -> dict:
    """Schema-check ``raw`` and fill defaults; returns a new mapping."""
    validate_schema(raw)
    cfg = copy.deepcopy(raw)
    preset = resolve_scenario(cfg["scenario"])
    for key in ("tau", "eps", "T", "T0_over_eps"):
        if key in cfg:
            cfg[key] = float(cfg[key])
    for key in ("eps", "tau"):
        if key in cfg.get("sweep", {}):
            cfg["sweep"][key] = [float(v) for v in cfg["sweep"][key]]
    cfg.setdefault("override_stability", False)
    cfg.setdefault("jobs", 1)
    cfg.setdefault("long", False)
    if "T" not in cfg and "T0_over_eps" not in cfg:
        cfg["T0_over_eps"] = 2.0
    sweep = cfg.get("sweep")
    if sweep is None:
        if isinstance(cfg["method"], list):
            if len(cfg["method"]) != 1:
                raise ConfigError("config.method: a single run takes one method")
            cfg["method"] = cfg["method"][0]
        cfg.setdefault("eps", preset.default_eps[0])
        cfg.setdefault("points", preset.default_points)
        cfg.setdefault("snapshots", [horizon(cfg, cfg["eps"])])
    else:
        if "eps" in cfg or "snapshots" in cfg:
            raise ConfigError("config: eps and snapshots belong to single runs; "
                              "sweeps take sweep.eps")
        if not isinstance(cfg["method"], list):
            cfg["method"] = [cfg["method"]]
        kind = sweep["kind"]
        if kind == "spatial":
            if "points" not in sweep:
                raise ConfigError("config.sweep.points: required for a spatial sweep")
            if "tau" in sweep:
                raise ConfigError("config.sweep.tau: a spatial sweep uses the top-level tau")
            cfg.setdefault("reference", {})
            cfg["reference"].setdefault("points", 128)
            cfg["reference"].setdefault("tau", cfg["tau"] / 10)
        else:
            if "tau" not in sweep:
                raise ConfigError(f"config.sweep.tau: required for a {kind} sweep")
            if "points" in sweep:
                raise ConfigError(f"config.sweep.points: a {kind} sweep uses the "
                                  "top-level points")
            cfg.setdefault("points", preset.default_points)
            cfg.setdefault("reference", {})
            if kind == "temporal":
                cfg["reference"].setdefault("points", cfg["points"])
                cfg["reference"].setdefault("tau", min(sweep["tau"]) / 10)
            else:
                cfg["reference"].setdefault("points", cfg["points"])
                cfg["reference"].setdefault("factor", 10)
                sweep.setdefault("stride", 10)
        if not cfg["long"]:
            longest = max(horizon(cfg, e) for e in sweep["eps"])
            if longest > HORIZON_CAP:
                raise ConfigError(
                    f"config.long: horizon t={longest:g} exceeds the desk-scale cap "
                    f"t <= {HORIZON_CAP:g}; set long: true to allow it")
    return cfg


def horizon(cfg: dict, eps: float) -> float:
    if "T" in cfg:
        return float(cfg["T"])
    if eps == 0:
        raise ConfigError("config.T0_over_eps: needs eps > 0; give T instead")
    return float(cfg["T0_over_eps"]) / eps


def config_hash(cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k not in _UNHASHED}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_config(path: str) -> dict:
    """Read YAML/JSON; a manifest is unwrapped to its embedded config."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    if isinstance(raw, dict) and "config_hash" in raw and "config" in raw:
        raw = raw["config"]
    return raw


def output_dir(cfg: dict, override=None) -> str:
    out = override or cfg.get("output") or cfg.get("name") or f"run-{config_hash(cfg)[:12]}"
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not os.path.isabs(out):
        out = os.path.join(root, out)
    return out


def _manifest(cfg, scheme, outputs, extra=None):
    embedded = {k: v for k, v in cfg.items() if k not in _UNHASHED}
    m = {"version": __version__, "scheme": scheme, "backend": _kernels.BACKEND,
         "config_hash": config_hash(cfg), "config": embedded,
         "outputs": sorted(outputs)}
    m.update(extra or {})
    return m


def _gate_record(gate):
    return {"method": gate.method, "tau": gate.tau,
            "bound": None if math.isinf(gate.bound) else gate.bound,
            "ok": gate.ok, "heuristic": gate.heuristic}


# ---------------------------------------------------------------- execution

def execute_run(cfg: dict, out: str) -> int:
    preset = resolve_scenario(cfg["scenario"])
    grid = preset.grid(cfg["points"])
    pot = preset.potential(cfg["eps"])
    T = horizon(cfg, cfg["eps"])
    tau = float(cfg["tau"])
    nsteps = steps_for(T, tau)
    marks = sorted({steps_for(float(s), tau) for s in cfg["snapshots"]})
    if marks and marks[-1] > nsteps:
        raise ConfigError(f"config.snapshots: times beyond the horizon T={T:g}")
    integ = Integrator(cfg["method"], pot, grid, tau,
                       override=cfg["override_stability"], T=T)
    integ.start(preset.initial(grid))
    outputs, rows = [], []

    def record(n):
        rho, mass = density(integ.field() if n else preset.initial(grid))
        name = f"density_{len(rows):03d}.txt"
        write_snapshot(os.path.join(out, name), rho, grid, n * tau)
        outputs.append(name)
        rows.append((n * tau, mass, name))

    done = 0
    for n in marks:
        integ.advance(n - done)
        done = n
        record(n)
    integ.advance(nsteps - done)
    write_csv(os.path.join(out, "observables.csv"), ("t", "mass", "snapshot"), rows)
    outputs.append("observables.csv")
    extra = {"gate": _gate_record(integ.gate), "t_final": nsteps * tau}
    if rows:
        m0 = rows[0][1]
        extra["mass_drift"] = max(abs(r[1] - m0) for r in rows) / m0 if m0 else None
    write_json(os.path.join(out, "manifest.json"),
               _manifest(cfg, cfg["method"], outputs, extra))
    print(f"{cfg['method']}: {nsteps} steps to t={nsteps * tau:g}; outputs in {out}")
    return 0


def _table_rows(report):
    cols, rows = report.table()
    key = "h" if report.axis == "h" else "tau"
    header = ["eps"] + [f"{key}={fmt(c)}" for c in cols]
    return header, [[eps] + errs for eps, errs in rows]


def execute_sweep(cfg: dict, out: str) -> int:
    sweep = cfg["sweep"]
    kind = sweep["kind"]
    preset = resolve_scenario(cfg["scenario"])
    ref = cfg["reference"]
    outputs, rejected, orders = [], [], []
    if kind == "growth":
        return _execute_growth(cfg, preset, out)
    cells = []
    for method in cfg["method"]:
        common = dict(T0=cfg.get("T0_over_eps", 2.0), T=cfg.get("T"),
                      ref_points=ref["points"], ref_tau=ref["tau"],
                      override=cfg["override_stability"], workers=cfg["jobs"])
        if kind == "spatial":
            report = spatial_sweep(method, preset, sweep["eps"], sweep["points"],
                                   cfg["tau"], **common)
        else:
            report = temporal_sweep(method, preset, sweep["eps"], sweep["tau"],
                                    points=cfg["points"], **common)
        cells.extend(report.cells)
        header, rows = _table_rows(report)
        name = f"table_{method}.csv"
        write_csv(os.path.join(out, name), header, rows)
        outputs.append(name)
        for eps in sweep["eps"]:
            order, resid = report.orders[eps]
            orders.append((method, eps, order, resid))
        for c in report.cells:
            if c.status != "ok":
                rejected.append(c.reason)
    write_csv(os.path.join(out, "sweep.csv"),
              ("method", "eps", "h", "tau", "t_final", "error", "wall_ms"),
              [(c.method, c.eps, c.h, c.tau, c.t_final, c.error, c.wall_ms)
               for c in cells])
    write_csv(os.path.join(out, "orders.csv"),
              ("method", "eps", "order", "residual"), orders)
    outputs += ["sweep.csv", "orders.csv"]
    reference = {"method": "tsfp", "points": ref["points"], "tau": ref["tau"]}
    write_json(os.path.join(out, "manifest.json"),
               _manifest(cfg, cfg["method"], outputs,
                         {"reference": reference, "rejected": rejected}))
    for reason in rejected:
        print(f"rejected: {reason}", file=sys.stderr)
    print(f"{kind} sweep: {len(cells)} cells; outputs in {out}")
    return EXIT_GATE if rejected else 0


def _execute_growth(cfg, preset, out):
    sweep = cfg["sweep"]
    ref = cfg["reference"]
    outputs, summary, rejected = [], [], []
    grid = preset.grid(cfg["points"])
    for method in cfg["method"]:
        for i, eps in enumerate(sweep["eps"]):
            T = horizon(cfg, eps)
            for j, tau in enumerate(sweep["tau"]):
                try:
                    prof = growth_profile(method, preset, eps, cfg["points"], tau, T,
                                          stride=sweep["stride"],
                                          ref_factor=ref["factor"],
                                          ref_points=ref["points"],
                                          override=cfg["override_stability"])
                except StabilityError as exc:
                    rejected.append(str(exc))
                    summary.append((method, eps, grid.spacing[0], tau, None, None,
                                    "rejected"))
                    continue
                name = f"growth_{method}_e{i}_t{j}.csv"
                write_csv(os.path.join(out, name), ("t", "error"),
                          zip(prof.times, prof.errors))
                outputs.append(name)
                summary.append((method, eps, grid.spacing[0], tau, prof.t_star,
                                prof.growth_rate, prof.note or "two-segment fit"))
    write_csv(os.path.join(out, "tstar.csv"),
              ("method", "eps", "h", "tau", "t_star", "growth_rate", "note"), summary)
    outputs.append("tstar.csv")
    write_json(os.path.join(out, "manifest.json"),
               _manifest(cfg, cfg["method"], outputs, {
                   "rejected": rejected,
                   "t_star_definition": "breakpoint of a two-segment least-squares "
                                        "fit: linear in the error, then linear in "
                                        "its logarithm"}))
    for reason in rejected:
        print(f"rejected: {reason}", file=sys.stderr)
    print(f"growth sweep: {len(summary)} profiles; outputs in {out}")
    return EXIT_GATE if rejected else 0


def planned_gates(cfg: dict):
    """Gate results for every run the config would perform."""
    preset = resolve_scenario(cfg["scenario"])
    sweep = cfg.get("sweep")
    if sweep is None:
        cells = [(cfg["method"], cfg["eps"], cfg["points"], cfg["tau"])]
    else:
        points = sweep.get("points", [cfg.get("points")])
        taus = sweep.get("tau", [cfg["tau"]])
        cells = [(m, e, n, t) for m in cfg["method"] for e in sweep["eps"]
                 for n in points for t in taus]
    results = []
    for method, eps, points, tau in cells:
        grid = preset.grid(points)
        results.append(evaluate_gate(method, tau, grid, preset.potential(eps),
                                     T=horizon(cfg, eps)))
    return results


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-ewi",
        description="Exponential wave integrators for the Dirac equation.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "run a config (single run or sweep)"),
                       ("sweep", "run a config with a sweep block"),
                       ("validate", "check a config without running it")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("config")
        if verb != "validate":
            p.add_argument("-o", "--output", help="output directory")
            p.add_argument("-j", "--jobs", type=int, help="parallel sweep jobs")
            p.add_argument("--override-stability", action="store_true",
                           help="run sEWI-FP beyond its step-size bound")
    sub.add_parser("presets", help="list built-in scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.verb == "presets":
        print(list_presets())
        return 0
    try:
        raw = load_config(args.config)
        if args.verb != "validate":
            if isinstance(raw, dict) and args.jobs:
                raw["jobs"] = args.jobs
            if isinstance(raw, dict) and args.override_stability:
                raw["override_stability"] = True
        cfg = normalize(raw)
        if args.verb == "sweep" and "sweep" not in cfg:
            raise ConfigError("config.sweep: the sweep verb needs a sweep block")
        if args.verb == "validate":
            return _validate(cfg)
        out = output_dir(cfg, args.output)
        if "sweep" in cfg:
            return execute_sweep(cfg, out)
        return execute_run(cfg, out)
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GATE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _validate(cfg) -> int:
    gates = planned_gates(cfg)
    bad = [g for g in gates if not g.ok and g.method == "sewi-fp"]
    for g in gates:
        if not g.ok:
            print(f"{'rejected' if g.method == 'sewi-fp' else 'warning'}: {g.reason}")
    if any(g.heuristic for g in gates):
        print("note: stability bounds are proved for constant potentials; "
              "treated as heuristic here")
    print(f"config hash {config_hash(cfg)}; {len(gates)} run(s) planned")
    if bad and not cfg["override_stability"]:
        return EXIT_GATE
    return 0


if __name__ == "__main__":
    sys.exit(main())
