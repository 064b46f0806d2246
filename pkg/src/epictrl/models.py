"""Controlled SIR and SEIRS epidemic models.

Compartments are absolute head counts. The total population ``n0`` is a
fixed parameter: births enter as ``mu * n0`` and every transmission term is
normalised by ``n0``, so the vector fields conserve ``sum(x) == n0`` exactly
and the adjoint equations carry no derivative of ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union


class ScenarioError(ValueError):
    """Raised when a scenario violates admissibility constraints.

    ``errors`` holds one message per violated constraint.
    """

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SirParams:
    mu: float
    beta: float
    gamma: float
    n0: float


@dataclass(frozen=True)
class SeirsParams:
    mu: float
    beta: float
    gamma: float
    alpha: float
    theta: float
    n0: float


class SirState(NamedTuple):
    s: float
    i: float
    r: float


class SeirsState(NamedTuple):
    s: float
    e: float
    i: float
    r: float


class ControlValue(NamedTuple):
    """Treatment rate ``u`` and vaccination rate ``v`` (unused by SIR)."""

    u: float = 0.0
    v: float = 0.0


def sir_rhs(state: SirState, params: SirParams, ctrl: ControlValue) -> SirState:
    """Time derivative of the controlled SIR system."""
    s, i, r = state
    p = params
    force = p.beta * s * i / p.n0
    return SirState(
        p.mu * p.n0 - force - p.mu * s,
        force - p.gamma * i - ctrl.u * i - p.mu * i,
        p.gamma * i + ctrl.u * i - p.mu * r,
    )


def seirs_rhs(state: SeirsState, params: SeirsParams, ctrl: ControlValue) -> SeirsState:
    """Time derivative of the controlled SEIRS system.

    Vaccination moves susceptibles straight to ``R``; immunity (natural or
    vaccine-induced) wanes at rate ``theta``.
    """
    s, e, i, r = state
    p = params
    force = p.beta * s * i / p.n0
    return SeirsState(
        p.mu * p.n0 - force - ctrl.v * s + p.theta * r - p.mu * s,
        force - p.alpha * e - p.mu * e,
        p.alpha * e - p.gamma * i - ctrl.u * i - p.mu * i,
        p.gamma * i + ctrl.u * i + ctrl.v * s - p.theta * r - p.mu * r,
    )


Params = Union[SirParams, SeirsParams]


@dataclass(frozen=True)
class ModelSpec:
    """A compartmental model together with its initial condition and horizon.

    Solvers only rely on the generic kernels below (:meth:`rhs`,
    :meth:`vjp`), which take and return plain float tuples so that the
    fixed-step loops stay cheap.
    """

    params: Params
    x0: tuple[float, ...]
    tf: float = 100.0
    t0: float = 0.0
    names: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        names = ("S", "I", "R") if isinstance(self.params, SirParams) else ("S", "E", "I", "R")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "x0", tuple(float(c) for c in self.x0))

    @property
    def kind(self) -> str:
        return "sir" if isinstance(self.params, SirParams) else "seirs"

    @property
    def n_compartments(self) -> int:
        return len(self.names)

    @property
    def n_controls(self) -> int:
        return 1 if self.kind == "sir" else 2

    @property
    def n0(self) -> float:
        return self.params.n0

    @property
    def i_index(self) -> int:
        return self.names.index("I")

    @property
    def r_index(self) -> int:
        return self.names.index("R")

    def state(self, x: Sequence[float]):
        """Wrap a raw vector in the model's named state type."""
        return SirState(*x) if self.kind == "sir" else SeirsState(*x)

    def rhs(self, x: Sequence[float], u: float, v: float = 0.0) -> tuple[float, ...]:
        if self.kind == "sir":
            return tuple(sir_rhs(SirState(*x), self.params, ControlValue(u, v)))
        return tuple(seirs_rhs(SeirsState(*x), self.params, ControlValue(u, v)))

    def vjp(self, x: Sequence[float], u: float, v: float, w: Sequence[float]):
        """Vector-Jacobian products ``w^T df/dx``, ``w^T df/du``, ``w^T df/dv``."""
        p = self.params
        if self.kind == "sir":
            s, i, _ = x
            ws, wi, wr = w
            bi = p.beta * i / p.n0
            bs = p.beta * s / p.n0
            gx = (
                -ws * (bi + p.mu) + wi * bi,
                -ws * bs + wi * (bs - p.gamma - u - p.mu) + wr * (p.gamma + u),
                -p.mu * wr,
            )
            return gx, i * (wr - wi), 0.0
        s, e, i, r = x
        ws, we, wi, wr = w
        bi = p.beta * i / p.n0
        bs = p.beta * s / p.n0
        gx = (
            -ws * (bi + v + p.mu) + we * bi + wr * v,
            -(p.alpha + p.mu) * we + p.alpha * wi,
            -ws * bs + we * bs - (p.gamma + u + p.mu) * wi + (p.gamma + u) * wr,
            p.theta * ws - (p.theta + p.mu) * wr,
        )
        return gx, i * (wr - wi), s * (wr - ws)


def validate_scenario(model: ModelSpec, rel_tol: float = 1e-9) -> list[str]:
    """Return a list of violated admissibility constraints (empty if valid)."""
    errors = []
    for name, value in vars(model.params).items():
        if not math.isfinite(value) or value <= 0:
            errors.append(f"non-positive parameter: {name}={value!r}")
    if model.n0 < 1:
        errors.append(f"population below one: n0={model.n0!r}")
    if len(model.x0) != model.n_compartments:
        errors.append(
            f"wrong compartment count: expected {model.n_compartments}, got {len(model.x0)}"
        )
    else:
        for name, value in zip(model.names, model.x0):
            if not math.isfinite(value):
                errors.append(f"non-finite compartment: {name}={value!r}")
            elif value < 0:
                errors.append(f"negative compartment: {name}={value!r}")
        total = sum(model.x0)
        if math.isfinite(total) and abs(total - model.n0) > rel_tol * max(model.n0, 1.0):
            errors.append(f"population mismatch: sum(x0)={total!r} != n0={model.n0!r}")
    if not (math.isfinite(model.tf) and model.tf > model.t0):
        errors.append(f"non-positive horizon: tf={model.tf!r}, t0={model.t0!r}")
    return errors


def check_scenario(model: ModelSpec) -> ModelSpec:
    errors = validate_scenario(model)
    if errors:
        raise ScenarioError(errors)
    return model

