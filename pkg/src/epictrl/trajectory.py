"""Fixed-step RK4 integration of the state and adjoint equations.

Controls are held constant on each interval, so every RK stage of interval
``k`` uses ``u[k]``. Two adjoints are provided:

* :func:`integrate_adjoint_backward` integrates the continuous costate ODE
  ``dlam/dt = -dH/dx`` backwards from ``lam(tf) = 0``. It feeds the
  forward-backward sweep and the stationarity diagnostics.
* :func:`discrete_gradient` is the exact reverse-mode derivative of the
  discretised objective (RK4 states, trapezoidal cost) with respect to every
  interval control. Projected gradient uses it so that line searches see the
  true derivative of what they minimise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import CostSpec, running_cost_grad
from .mesh import ControlGrid, MeshMismatchError, TimeMesh, quadrature
from .models import ControlValue, ModelSpec


class IntegrationError(ArithmeticError):
    def __init__(self, message: str, node: int):
        super().__init__(f"{message} at node {node}")
        self.node = node


@dataclass(frozen=True, eq=False)
class Trajectory:
    mesh: TimeMesh
    states: np.ndarray  # (n_steps + 1, n_compartments)
    names: tuple[str, ...]

    @property
    def t(self) -> np.ndarray:
        return self.mesh.nodes

    def __getitem__(self, name: str) -> np.ndarray:
        return self.states[:, self.names.index(name)]


@dataclass(frozen=True, eq=False)
class AdjointTrajectory:
    mesh: TimeMesh
    lambdas: np.ndarray  # (n_steps + 1, n_compartments)
    names: tuple[str, ...]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.lambdas[:, self.names.index(name)]


def _controls(model: ModelSpec, ctrl: ControlGrid):
    if ctrl.n_controls != model.n_controls:
        raise ValueError(f"{model.kind} model takes {model.n_controls} control(s), got {ctrl.n_controls}")
    u = ctrl.u.tolist()
    v = ctrl.v.tolist() if ctrl.v is not None else [0.0] * len(u)
    return u, v


def _axpy(x, a, y):
    return tuple(xi + a * yi for xi, yi in zip(x, y))


def integrate_forward(model: ModelSpec, x0, ctrl: ControlGrid, mesh: TimeMesh | None = None) -> Trajectory:
    """Classical RK4 with zero-order-hold controls."""
    mesh = ctrl.mesh if mesh is None else mesh
    if ctrl.mesh != mesh:
        raise MeshMismatchError("control grid and mesh differ")
    u, v = _controls(model, ctrl)
    h = mesh.h
    f = model.rhs
    x = tuple(float(c) for c in x0)
    out = [x]
    for k in range(mesh.n_steps):
        uk, vk = u[k], v[k]
        k1 = f(x, uk, vk)
        k2 = f(_axpy(x, 0.5 * h, k1), uk, vk)
        k3 = f(_axpy(x, 0.5 * h, k2), uk, vk)
        k4 = f(_axpy(x, h, k3), uk, vk)
        x = tuple(
            xi + h / 6.0 * (a + 2.0 * b + 2.0 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
        )
        if not all(math.isfinite(c) for c in x):
            raise IntegrationError("non-finite state", k + 1)
        out.append(x)
    return Trajectory(mesh, np.array(out), model.names)


def _adjoint_rhs(model: ModelSpec, cost: CostSpec, x, u, v, lam):
    _, lx, _, _ = running_cost_grad(cost, model, x, u, v)
    fx, _, _ = model.vjp(x, u, v, lam)
    return tuple(-(a + b) for a, b in zip(lx, fx))


def integrate_adjoint_backward(
    model: ModelSpec, traj: Trajectory, ctrl: ControlGrid, cost: CostSpec
) -> AdjointTrajectory:
    """RK4 backwards in time from ``lam(tf) = 0``.

    Stage states at the interval midpoint are the average of the stored
    endpoint states; the interval's control is used at all four stages.
    """
    mesh = traj.mesh
    if ctrl.mesh != mesh:
        raise MeshMismatchError("trajectory and control grid live on different meshes")
    u, v = _controls(model, ctrl)
    h = mesh.h
    xs = [tuple(row) for row in traj.states.tolist()]
    n = mesh.n_steps
    lam = (0.0,) * model.n_compartments
    out = [lam]
    g = _adjoint_rhs
    for k in range(n - 1, -1, -1):
        xa, xb = xs[k + 1], xs[k]
        xm = tuple(0.5 * (a + b) for a, b in zip(xa, xb))
        uk, vk = u[k], v[k]
        # integrate in reversed time s = tf - t, d lam/ds = -g
        k1 = g(model, cost, xa, uk, vk, lam)
        k2 = g(model, cost, xm, uk, vk, _axpy(lam, -0.5 * h, k1))
        k3 = g(model, cost, xm, uk, vk, _axpy(lam, -0.5 * h, k2))
        k4 = g(model, cost, xb, uk, vk, _axpy(lam, -h, k3))
        lam = tuple(
            li - h / 6.0 * (a + 2.0 * b + 2.0 * c + d) for li, a, b, c, d in zip(lam, k1, k2, k3, k4)
        )
        if not all(math.isfinite(c) for c in lam):
            raise IntegrationError("non-finite adjoint", k)
        out.append(lam)
    out.reverse()
    return AdjointTrajectory(mesh, np.array(out), model.names)


def discrete_gradient(model: ModelSpec, traj: Trajectory, ctrl: ControlGrid, cost: CostSpec) -> np.ndarray:
    """Exact gradient of the discretised objective w.r.t. interval controls.

    Returns an ``(n_controls, n_steps)`` array. Each entry equals ``h`` times
    an RK-stage-weighted average of ``dH/du`` on that interval, built from the
    discrete costates propagated through the transposed RK4 steps.
    """
    mesh = traj.mesh
    if ctrl.mesh != mesh:
        raise MeshMismatchError("trajectory and control grid live on different meshes")
    u, v = _controls(model, ctrl)
    h = mesh.h
    n = mesh.n_steps
    nc = model.n_compartments
    f = model.rhs
    vjp = model.vjp
    xs = [tuple(row) for row in traj.states.tolist()]
    gu = np.zeros(n)
    gv = np.zeros(n)
    # adjoint of the state at node n: only the right trapezoid end of interval n-1
    _, lx, _, _ = running_cost_grad(cost, model, xs[n], u[n - 1], v[n - 1])
    xbar = tuple(0.5 * h * c for c in lx)
    for k in range(n - 1, -1, -1):
        x = xs[k]
        uk, vk = u[k], v[k]
        _, _, lu_r, lv_r = running_cost_grad(cost, model, xs[k + 1], uk, vk)
        _, lx_l, lu_l, lv_l = running_cost_grad(cost, model, x, uk, vk)
        ubar = 0.5 * h * (lu_l + lu_r)
        vbar = 0.5 * h * (lv_l + lv_r)
        # recompute stages
        y1 = x
        k1 = f(y1, uk, vk)
        y2 = _axpy(x, 0.5 * h, k1)
        k2 = f(y2, uk, vk)
        y3 = _axpy(x, 0.5 * h, k2)
        k3 = f(y3, uk, vk)
        y4 = _axpy(x, h, k3)
        # reverse sweep through x+ = x + h/6 (k1 + 2k2 + 2k3 + k4)
        kb4 = tuple(h / 6.0 * c for c in xbar)
        kb3 = tuple(h / 3.0 * c for c in xbar)
        kb2 = kb3
        kb1 = kb4
        acc = list(xbar)
        gx, gu4, gv4 = vjp(y4, uk, vk, kb4)
        acc = [a + b for a, b in zip(acc, gx)]
        kb3 = _axpy(kb3, h, gx)
        gx, gu3, gv3 = vjp(y3, uk, vk, kb3)
        acc = [a + b for a, b in zip(acc, gx)]
        kb2 = _axpy(kb2, 0.5 * h, gx)
        gx, gu2, gv2 = vjp(y2, uk, vk, kb2)
        acc = [a + b for a, b in zip(acc, gx)]
        kb1 = _axpy(kb1, 0.5 * h, gx)
        gx, gu1, gv1 = vjp(y1, uk, vk, kb1)
        acc = [a + b for a, b in zip(acc, gx)]
        gu[k] = ubar + gu1 + gu2 + gu3 + gu4
        gv[k] = vbar + gv1 + gv2 + gv3 + gv4
        # running-cost contributions to node k: left end of interval k, right end of k-1
        lx_prev = running_cost_grad(cost, model, x, u[k - 1], v[k - 1])[1] if k > 0 else [0.0] * nc
        xbar = tuple(a + 0.5 * h * (b + c) for a, b, c in zip(acc, lx_l, lx_prev))
    if model.n_controls == 1:
        return gu[None, :]
    return np.vstack([gu, gv])


def node_controls(model: ModelSpec, ctrl: ControlGrid, k: int) -> ControlValue:
    """Control value attributed to node ``k`` (the interval it opens; last node uses the last interval)."""
    j = min(k, ctrl.mesh.n_steps - 1)
    return ControlValue(float(ctrl.u[j]), float(ctrl.v[j]) if ctrl.v is not None else 0.0)


__all__ = [
    "AdjointTrajectory",
    "IntegrationError",
    "Trajectory",
    "discrete_gradient",
    "integrate_adjoint_backward",
    "integrate_forward",
    "node_controls",
    "quadrature",
]
