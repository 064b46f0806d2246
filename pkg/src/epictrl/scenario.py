"""Scenario configuration: JSON files and built-in presets."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .cost import ALL_KINDS, CostKind
from .mesh import TimeMesh
from .models import ModelSpec, ScenarioError, SeirsParams, SirParams, validate_scenario
from .solvers import SolveConfig


class ConfigError(ValueError):
    """Malformed configuration (syntax, unknown keys, wrong types)."""


# exactly 1/(70*365), kept rational until converted to float
SIR_MU = float(Fraction(1, 70 * 365))

_PARAM_KEYS = {
    "sir": ("mu", "beta", "gamma", "n0"),
    "seirs": ("mu", "beta", "gamma", "alpha", "theta", "n0"),
}
_COMPARTMENTS = {"sir": ("S", "I", "R"), "seirs": ("S", "E", "I", "R")}
_TOP_KEYS = {
    "name",
    "model",
    "params",
    "initial",
    "t0",
    "tf",
    "n_steps",
    "weights",
    "kinds",
    "solver",
    "output_dir",
    "effectiveness_tie_tol",
    "fixed_control",
    "assumed",
}


@dataclass(frozen=True)
class ScenarioConfig:
    model: str
    params: dict
    initial: dict
    tf: float = 100.0
    t0: float = 0.0
    n_steps: int = 1000
    a1: float = 100.0
    a2: float = 10.0
    kinds: tuple[CostKind, ...] = ALL_KINDS
    solver: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    effectiveness_tie_tol: float = 0.0
    fixed_control: dict = field(default_factory=dict)
    name: Optional[str] = None
    # entries the source did not state and that were filled in by assumption
    assumed: tuple[str, ...] = ()

    def model_spec(self) -> ModelSpec:
        names = _COMPARTMENTS[self.model]
        params = SirParams(**self.params) if self.model == "sir" else SeirsParams(**self.params)
        return ModelSpec(params, tuple(self.initial[c] for c in names), tf=self.tf, t0=self.t0)

    def mesh(self) -> TimeMesh:
        return TimeMesh(self.t0, self.tf, self.n_steps)

    def solve_config(self) -> SolveConfig:
        return SolveConfig(**self.solver)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "model": self.model,
            "params": dict(self.params),
            "initial": dict(self.initial),
            "t0": self.t0,
            "tf": self.tf,
            "n_steps": self.n_steps,
            "weights": {"a1": self.a1, "a2": self.a2},
            "kinds": [k.value for k in self.kinds],
            "solver": dict(self.solver),
            "output_dir": self.output_dir,
            "effectiveness_tie_tol": self.effectiveness_tie_tol,
            "fixed_control": dict(self.fixed_control),
            "assumed": list(self.assumed),
        }
        return d


PRESETS = {
    "sir-ebola-2015": dict(
        name="sir-ebola-2015",
        model="sir",
        params={"mu": SIR_MU, "beta": 0.2, "gamma": 0.1, "n0": 100000.0},
        initial={"S": 95000.0, "I": 5000.0, "R": 0.0},
        tf=100.0,
        effectiveness_tie_tol=1.0,
    ),
    "seirs-trawicki-2017": dict(
        name="seirs-trawicki-2017",
        model="seirs",
        params={"mu": 0.00003, "beta": 0.25, "gamma": 0.14, "alpha": 0.33, "theta": 0.07, "n0": 100000.0},
        initial={"S": 95000.0, "E": 0.0, "I": 5000.0, "R": 0.0},
        tf=100.0,
        assumed=("initial",),
    ),
}


def _check(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _number(value, where: str) -> float:
    _check(isinstance(value, (int, float)) and not isinstance(value, bool), f"{where} must be a number")
    return float(value)


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build and validate a scenario from parsed JSON.

    Unknown keys are rejected at every level. A ``"preset"`` key is not
    accepted here; presets are loaded by name through :func:`preset`.
    """
    _check(isinstance(data, dict), "configuration must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    _check(not unknown, f"unknown keys: {sorted(unknown)}")
    model = data.get("model")
    _check(model in _PARAM_KEYS, f"model must be 'sir' or 'seirs', got {model!r}")

    params = data.get("params")
    _check(isinstance(params, dict), "params must be an object")
    expected = set(_PARAM_KEYS[model])
    _check(set(params) == expected, f"params for {model} must be exactly {sorted(expected)}, got {sorted(params)}")
    params = {k: _number(params[k], f"params.{k}") for k in _PARAM_KEYS[model]}

    initial = data.get("initial")
    _check(isinstance(initial, dict), "initial must be an object")
    comps = set(_COMPARTMENTS[model])
    _check(set(initial) == comps, f"initial for {model} must be exactly {sorted(comps)}, got {sorted(initial)}")
    initial = {k: _number(initial[k], f"initial.{k}") for k in _COMPARTMENTS[model]}

    kw = {}
    for key in ("t0", "tf", "effectiveness_tie_tol"):
        if key in data:
            kw[key] = _number(data[key], key)
    if "n_steps" in data:
        n = data["n_steps"]
        _check(isinstance(n, int) and not isinstance(n, bool) and n >= 1, "n_steps must be a positive integer")
        kw["n_steps"] = n
    weights = data.get("weights", {})
    _check(isinstance(weights, dict) and set(weights) <= {"a1", "a2"}, "weights may only contain a1 and a2")
    for key in weights:
        kw[key] = _number(weights[key], f"weights.{key}")
    if "kinds" in data:
        kinds = data["kinds"]
        _check(isinstance(kinds, list) and kinds, "kinds must be a nonempty list")
        try:
            parsed = tuple(CostKind.parse(k) for k in kinds)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        _check(len(set(parsed)) == len(parsed), "kinds must not repeat")
        kw["kinds"] = parsed
    solver = data.get("solver", {})
    _check(isinstance(solver, dict), "solver must be an object")
    allowed = {f.name for f in fields(SolveConfig)}
    _check(set(solver) <= allowed, f"unknown solver keys: {sorted(set(solver) - allowed)}")
    try:
        SolveConfig(**solver)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None
    kw["solver"] = dict(solver)
    fixed = data.get("fixed_control", {})
    _check(isinstance(fixed, dict) and set(fixed) <= {"u", "v"}, "fixed_control may only contain u and v")
    for key, value in fixed.items():
        value = _number(value, f"fixed_control.{key}")
        _check(0.0 <= value <= 1.0, f"fixed_control.{key} must lie in [0, 1]")
    kw["fixed_control"] = {k: float(v) for k, v in fixed.items()}
    if data.get("output_dir") is not None:
        _check(isinstance(data["output_dir"], str), "output_dir must be a string")
        kw["output_dir"] = data["output_dir"]
    if data.get("name") is not None:
        kw["name"] = str(data["name"])
    assumed = data.get("assumed", [])
    _check(isinstance(assumed, list), "assumed must be a list")
    kw["assumed"] = tuple(str(a) for a in assumed)

    cfg = ScenarioConfig(model=model, params=params, initial=initial, **kw)
    errors = validate_scenario(cfg.model_spec())
    if errors:
        raise ScenarioError(errors)
    return cfg


def preset(name: str) -> ScenarioConfig:
    try:
        data = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
    d = dict(data)
    d["assumed"] = list(d.get("assumed", ()))
    return scenario_from_dict(d)


def load_scenario(path) -> ScenarioConfig:
    """Load a JSON scenario file, or a preset when ``path`` names one."""
    if str(path) in PRESETS:
        return preset(str(path))
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def dump_scenario(cfg: ScenarioConfig, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return path


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    """Copy with selected fields replaced (``None`` values are ignored)."""
    changes = {k: v for k, v in changes.items() if v is not None}
    out = replace(cfg, **changes)
    errors = validate_scenario(out.model_spec())
    if errors:
        raise ScenarioError(errors)
    return out
