"""Cost functionals, Hamiltonian and pointwise control laws.

Every functional has the running cost ``A1*I + sigma(u, v, x)`` where the
intervention cost ``sigma`` is quadratic or linear in the controls and is
either state independent or weighted by the treated compartment (``I`` for
treatment, ``S`` for vaccination).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .mesh import ControlGrid, MeshMismatchError
from .models import ControlValue, ModelSpec


class CostKind(str, enum.Enum):
    QSI = "QSI"
    QSD = "QSD"
    LSI = "LSI"
    LSD = "LSD"

    @property
    def quadratic(self) -> bool:
        return self in (CostKind.QSI, CostKind.QSD)

    @property
    def state_dependent(self) -> bool:
        return self in (CostKind.QSD, CostKind.LSD)

    @classmethod
    def parse(cls, value) -> "CostKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown cost kind {value!r}; expected one of QSI, QSD, LSI, LSD") from None


ALL_KINDS = tuple(CostKind)


class UnsupportedKindError(ValueError):
    pass


@dataclass(frozen=True)
class CostSpec:
    kind: CostKind
    a1: float = 100.0
    a2: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CostKind.parse(self.kind))
        if self.a1 < 0 or self.a2 < 0:
            raise ValueError("cost weights must be nonnegative")
        if self.a1 <= self.a2:
            warnings.warn(
                f"morbidity weight a1={self.a1} does not exceed intervention weight a2={self.a2}",
                stacklevel=3,
            )

    def with_kind(self, kind) -> "CostSpec":
        return CostSpec(kind, self.a1, self.a2)


class CostVector(NamedTuple):
    c1: float
    c2: float
    c3: float
    c4: float

    def __getitem__(self, key):
        if isinstance(key, (CostKind, str)):
            return getattr(self, "c%d" % (ALL_KINDS.index(CostKind.parse(key)) + 1))
        return tuple.__getitem__(self, key)


def _sigma_parts(spec: CostSpec, model: ModelSpec, x: Sequence[float], u: float, v: float):
    """Intervention cost and its partials ``(sigma, dsigma/dx, dsigma/du, dsigma/dv)``.

    ``dsigma/dx`` is returned sparsely as ``(dsigma/dS, dsigma/dI)``.
    """
    a2 = spec.a2
    seirs = model.kind == "seirs"
    s = x[0]
    i = x[model.i_index]
    if not seirs:
        v = 0.0
    kind = spec.kind
    if kind is CostKind.QSI:
        return a2 * (u * u + v * v), 0.0, 0.0, 2 * a2 * u, 2 * a2 * v
    if kind is CostKind.QSD:
        ds = a2 * v * v if seirs else 0.0
        return a2 * (u * u * i + v * v * s), ds, a2 * u * u, 2 * a2 * u * i, 2 * a2 * v * s
    if kind is CostKind.LSI:
        return a2 * (u + v), 0.0, 0.0, a2, (a2 if seirs else 0.0)
    ds = a2 * v if seirs else 0.0
    return a2 * (u * i + v * s), ds, a2 * u, a2 * i, a2 * s


def running_cost(spec: CostSpec, model: ModelSpec, x: Sequence[float], ctrl: ControlValue) -> float:
    """Morbidity plus intervention cost rate at one instant."""
    sigma = _sigma_parts(spec, model, x, ctrl.u, ctrl.v)[0]
    return spec.a1 * x[model.i_index] + sigma


def running_cost_grad(spec: CostSpec, model: ModelSpec, x, u: float, v: float):
    """``(L, dL/dx, dL/du, dL/dv)`` for the running cost ``L``."""
    sigma, ds, di, du, dv = _sigma_parts(spec, model, x, u, v)
    gx = [0.0] * model.n_compartments
    gx[0] += ds
    gx[model.i_index] += spec.a1 + di
    return spec.a1 * x[model.i_index] + sigma, gx, du, dv


def hamiltonian(spec: CostSpec, model: ModelSpec, x, lam, ctrl: ControlValue) -> float:
    """``H = L(x, u, v) + lam . f(x, u, v)``."""
    f = model.rhs(x, ctrl.u, ctrl.v)
    return running_cost(spec, model, x, ctrl) + float(np.dot(lam, f))


def hamiltonian_gradient(spec: CostSpec, model: ModelSpec, x, lam, ctrl: ControlValue):
    """``(dH/du, dH/dv)`` at one instant; ``dH/dv`` is 0 for SIR."""
    _, _, du, dv = running_cost_grad(spec, model, x, ctrl.u, ctrl.v)
    _, fu, fv = model.vjp(x, ctrl.u, ctrl.v, lam)
    if model.kind == "sir":
        return du + fu, 0.0
    return du + fu, dv + fv


def _clip01(value: float) -> float:
    return min(1.0, max(0.0, value))


def pmp_control_law(spec: CostSpec, model: ModelSpec, x, lam) -> ControlValue:
    """Pointwise minimiser of the Hamiltonian for the quadratic functionals.

    Setting ``dH/du = 0`` gives ``u = (lam_I - lam_R) I / (2 A2)`` for QSI and
    ``u = (lam_I - lam_R) / (2 A2)`` for QSD (the common factor ``I`` cancels);
    the vaccination analogue uses ``S`` and ``lam_S - lam_R``. Both are clipped
    to [0, 1].
    """
    if not spec.kind.quadratic:
        raise UnsupportedKindError(f"no closed-form control law for {spec.kind.value}")
    s = x[0]
    i = x[model.i_index]
    ri = model.r_index
    di = lam[model.i_index] - lam[ri]
    if spec.kind is CostKind.QSI:
        u = _clip01(di * i / (2 * spec.a2))
    else:
        u = _clip01(di / (2 * spec.a2))
    if model.kind == "sir":
        return ControlValue(u, 0.0)
    ds = lam[0] - lam[ri]
    if spec.kind is CostKind.QSI:
        v = _clip01(ds * s / (2 * spec.a2))
    else:
        v = _clip01(ds / (2 * spec.a2))
    return ControlValue(u, v)


def switching_function(spec: CostSpec, model: ModelSpec, x, lam) -> tuple[float, float]:
    """``dH/du`` (and ``dH/dv``) for the linear functionals.

    Positive values mean the control should be off, negative values on.
    The vaccination channel is 0 for SIR.
    """
    if spec.kind.quadratic:
        raise UnsupportedKindError(f"{spec.kind.value} is not control-linear")
    s = x[0]
    i = x[model.i_index]
    ri = model.r_index
    di = lam[model.i_index] - lam[ri]
    if spec.kind is CostKind.LSI:
        psi_u = spec.a2 - di * i
    else:
        psi_u = i * (spec.a2 - di)
    if model.kind == "sir":
        return psi_u, 0.0
    ds = lam[0] - lam[ri]
    if spec.kind is CostKind.LSI:
        psi_v = spec.a2 - ds * s
    else:
        psi_v = s * (spec.a2 - ds)
    return psi_u, psi_v


def interval_costs(traj, ctrl: ControlGrid, spec: CostSpec, model: ModelSpec) -> np.ndarray:
    """Trapezoidal cost of each interval, with the interval's control at both ends."""
    if ctrl.mesh != traj.mesh:
        raise MeshMismatchError("trajectory and control grid live on different meshes")
    u = ctrl.u.tolist()
    v = ctrl.v.tolist() if ctrl.v is not None else [0.0] * len(u)
    xs = traj.states.tolist()
    left = [running_cost_grad(spec, model, xs[k], u[k], v[k])[0] for k in range(len(u))]
    right = [running_cost_grad(spec, model, xs[k + 1], u[k], v[k])[0] for k in range(len(u))]
    return 0.5 * traj.mesh.h * (np.array(left) + np.array(right))


def evaluate_j(traj, ctrl: ControlGrid, spec: CostSpec, model: ModelSpec) -> float:
    """Objective value of a control along its trajectory.

    With ``u = 0`` this is exactly ``A1 * quadrature(I)`` for every kind.
    """
    return float(interval_costs(traj, ctrl, spec, model).sum())


def cost_vector(traj, ctrl: ControlGrid, model: ModelSpec, a1: float = 100.0, a2: float = 10.0) -> CostVector:
    """The same strategy priced under all four functionals."""
    return CostVector(*(evaluate_j(traj, ctrl, CostSpec(k, a1, a2), model) for k in ALL_KINDS))
