"""Optimal-control solvers: forward-backward sweep and projected gradient."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cost import (
    CostSpec,
    UnsupportedKindError,
    evaluate_j,
    hamiltonian_gradient,
    pmp_control_law,
)
from .mesh import ControlGrid, TimeMesh
from .models import ControlValue, ModelSpec, check_scenario
from .trajectory import (
    AdjointTrajectory,
    Trajectory,
    discrete_gradient,
    integrate_adjoint_backward,
    integrate_forward,
    node_controls,
)

log = logging.getLogger(__name__)

# controls closer than this to a bound count as boundary-active
_ACTIVE_EPS = 1e-9
# floor for the state weight used to scale gradient steps
_WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 1000
    control_tol: float = 1e-6
    damping: float = 0.5
    min_damping: float = 0.01
    pg_tol: float = 1e-3
    step0: float = 1.0
    shrink: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 40
    step_growth: float = 2.0
    min_step: float = 1e-10
    max_step: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.min_damping <= self.damping <= 1.0:
            raise ValueError("damping must satisfy 0 < min_damping <= damping <= 1")
        if self.control_tol <= 0 or self.pg_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("sufficient-decrease constant must lie in (0, 1)")
        if self.max_iters < 1 or self.step0 <= 0:
            raise ValueError("max_iters and step0 must be positive")


@dataclass(frozen=True, eq=False)
class SolveResult:
    control: ControlGrid
    trajectory: Trajectory
    adjoint: AdjointTrajectory
    objective: float
    iterations: int
    converged: bool
    stationarity_residual: float
    method: str
    cost: CostSpec
    # control-law values at the mesh nodes (sweep only)
    node_control: Optional[np.ndarray] = None
    # relative sup-norm gap between the control and the law re-applied to its own state/adjoint
    fixed_point_residual: Optional[float] = None
    history: tuple[float, ...] = field(default=(), repr=False)
    message: str = ""
    # wall-clock seconds spent in solve(); not part of any emitted file
    elapsed: float = field(default=0.0, repr=False)


def _law_at_nodes(model: ModelSpec, cost: CostSpec, traj: Trajectory, adj: AdjointTrajectory) -> np.ndarray:
    xs = traj.states.tolist()
    ls = adj.lambdas.tolist()
    out = np.empty((model.n_controls, len(xs)))
    for k, (x, lam) in enumerate(zip(xs, ls)):
        c = pmp_control_law(cost, model, x, lam)
        out[:, k] = c[: model.n_controls]
    return out


def _grid_from_nodes(mesh: TimeMesh, nodes: np.ndarray) -> ControlGrid:
    return ControlGrid.from_array(mesh, 0.5 * (nodes[:, :-1] + nodes[:, 1:]))


def stationarity_residual(
    model: ModelSpec,
    cost: CostSpec,
    traj: Trajectory,
    adj: AdjointTrajectory,
    ctrl: ControlGrid,
    node_control: Optional[np.ndarray] = None,
) -> float:
    """Largest ``|dH/du|`` (and ``|dH/dv|``) over nodes where that control is interior."""
    worst = 0.0
    xs = traj.states.tolist()
    ls = adj.lambdas.tolist()
    for k, (x, lam) in enumerate(zip(xs, ls)):
        if node_control is not None:
            c = ControlValue(*node_control[:, k])
        else:
            c = node_controls(model, ctrl, k)
        grads = hamiltonian_gradient(cost, model, x, lam, c)
        for value, g in list(zip(c, grads))[: model.n_controls]:
            if _ACTIVE_EPS < value < 1.0 - _ACTIVE_EPS:
                worst = max(worst, abs(g))
    return worst


def _mesh_for(model: ModelSpec, mesh: TimeMesh | int | None) -> TimeMesh:
    if mesh is None:
        return TimeMesh(model.t0, model.tf, 1000)
    if isinstance(mesh, int):
        return TimeMesh(model.t0, model.tf, mesh)
    return mesh


def forward_backward_sweep(
    model: ModelSpec, cost: CostSpec, mesh: TimeMesh | int | None = None, config: SolveConfig = SolveConfig()
) -> SolveResult:
    """Damped forward-backward sweep for the quadratic functionals.

    Iterates on the control-law values at the mesh nodes; the control on each
    interval is the mean of its two end-node values. Stops when the relative
    sup-norm change of the node controls drops below ``control_tol``; the
    returned control is the one whose state and adjoint produced that
    last law evaluation.
    """
    if not cost.kind.quadratic:
        raise UnsupportedKindError(f"forward-backward sweep needs a quadratic functional, got {cost.kind.value}")
    check_scenario(model)
    mesh = _mesh_for(model, mesh)
    nodes = np.zeros((model.n_controls, mesh.n_steps + 1))
    damping = config.damping
    history = []
    converged = False
    prev_change = np.inf
    it = 0

    def sweep(nodes):
        ctrl = _grid_from_nodes(mesh, nodes)
        traj = integrate_forward(model, model.x0, ctrl, mesh)
        adj = integrate_adjoint_backward(model, traj, ctrl, cost)
        new = _law_at_nodes(model, cost, traj, adj)
        change = np.max(np.abs(new - nodes)) / max(np.max(np.abs(new)), 1e-300)
        return ctrl, traj, adj, new, change

    for it in range(1, config.max_iters + 1):
        ctrl, traj, adj, new, change = sweep(nodes)
        history.append(evaluate_j(traj, ctrl, cost, model))
        log.debug("fbs %s iter %d J=%.10g change=%.3e d=%.3g", cost.kind.value, it, history[-1], change, damping)
        if change < config.control_tol:
            converged = True
            break
        if change >= prev_change:
            damping = max(0.5 * damping, config.min_damping)
        prev_change = change
        nodes = (1.0 - damping) * nodes + damping * new
    if converged:
        # adopt the exact law output so bound-active nodes sit exactly on the bounds
        nodes = new
        ctrl, traj, adj, new, residual = sweep(nodes)
        history.append(evaluate_j(traj, ctrl, cost, model))
    else:
        ctrl, traj, adj, new, residual = sweep(nodes)
        history.append(evaluate_j(traj, ctrl, cost, model))
    return SolveResult(
        control=ctrl,
        trajectory=traj,
        adjoint=adj,
        objective=history[-1],
        iterations=it,
        converged=converged,
        stationarity_residual=stationarity_residual(model, cost, traj, adj, ctrl, nodes),
        method="fbs",
        cost=cost,
        node_control=nodes,
        fixed_point_residual=float(residual),
        history=tuple(history),
        message="" if converged else f"no convergence in {config.max_iters} sweeps",
    )


def _step_scale(model: ModelSpec, cost: CostSpec, traj: Trajectory) -> np.ndarray:
    """Diagonal metric for gradient steps: curvature-like size of ``dL/du`` per interval.

    State-dependent costs are scaled by the treated compartment (``I`` for
    ``u``, ``S`` for ``v``) so that intervals with vanishing prevalence still
    move at the same rate in control units.
    """
    h = traj.mesh.h
    factor = h * cost.a2 * (2.0 if cost.kind.quadratic else 1.0)
    factor = max(factor, 1e-300)
    n = traj.mesh.n_steps
    scale = np.full((model.n_controls, n), factor)
    if cost.kind.state_dependent:
        cols = [model.i_index, 0][: model.n_controls]
        for row, c in enumerate(cols):
            x = traj.states[:, c]
            scale[row] *= np.maximum(0.5 * (x[:-1] + x[1:]), _WEIGHT_FLOOR)
    return scale


def projected_gradient(
    model: ModelSpec,
    cost: CostSpec,
    mesh: TimeMesh | int | None = None,
    config: SolveConfig = SolveConfig(),
    initial: Optional[ControlGrid] = None,
) -> SolveResult:
    """Scaled projected gradient with Armijo backtracking on ``[0, 1]^n``.

    Works for every cost kind. The gradient is the exact derivative of the
    discretised objective; accepted objective values never increase.
    Terminates when the sup-norm of the projected scaled step falls below
    ``pg_tol``.
    """
    check_scenario(model)
    mesh = _mesh_for(model, mesh)
    if initial is None:
        a = np.zeros((model.n_controls, mesh.n_steps))
    else:
        a = np.clip(initial.as_array(), 0.0, 1.0)
    ctrl = ControlGrid.from_array(mesh, a)
    traj = integrate_forward(model, model.x0, ctrl, mesh)
    j = evaluate_j(traj, ctrl, cost, model)
    history = [j]
    alpha = config.step0
    converged = False
    message = ""
    it = 0
    a_prev = g_prev = None
    for it in range(1, config.max_iters + 1):
        g = discrete_gradient(model, traj, ctrl, cost)
        scale = _step_scale(model, cost, traj)
        d = g / scale
        measure = float(np.max(np.abs(np.clip(a - d, 0.0, 1.0) - a)))
        if measure < config.pg_tol:
            converged = True
            break
        if a_prev is not None:
            # Barzilai-Borwein trial step in the scaled metric
            s = a - a_prev
            sy = float(np.sum(s * (g - g_prev)))
            if sy > 0:
                alpha = min(max(float(np.sum(s * s * scale)) / sy, config.min_step), config.max_step)
        a_prev, g_prev = a, g
        for _ in range(config.max_backtracks):
            trial = np.clip(a - alpha * d, 0.0, 1.0)
            decrease = float(np.sum(g * (trial - a)))
            t_ctrl = ControlGrid.from_array(mesh, trial)
            t_traj = integrate_forward(model, model.x0, t_ctrl, mesh)
            t_j = evaluate_j(t_traj, t_ctrl, cost, model)
            if t_j <= j + config.armijo_c * decrease:
                break
            alpha *= config.shrink
        else:
            message = "line search failed"
            break
        a, ctrl, traj, j = trial, t_ctrl, t_traj, t_j
        history.append(j)
        log.debug("pg %s iter %d J=%.12g step=%.3e pgnorm=%.3e", cost.kind.value, it, j, alpha, measure)
        alpha = min(alpha * config.step_growth, config.max_step)
    else:
        message = f"no convergence in {config.max_iters} iterations"
    adj = integrate_adjoint_backward(model, traj, ctrl, cost)
    return SolveResult(
        control=ctrl,
        trajectory=traj,
        adjoint=adj,
        objective=j,
        iterations=it,
        converged=converged,
        stationarity_residual=stationarity_residual(model, cost, traj, adj, ctrl),
        method="pg",
        cost=cost,
        history=tuple(history),
        message=message,
    )


def solve(
    model: ModelSpec, cost: CostSpec, mesh: TimeMesh | int | None = None, config: SolveConfig = SolveConfig()
) -> SolveResult:
    """Sweep for quadratic kinds (projected gradient if it fails), projected gradient otherwise."""
    start = time.perf_counter()
    if cost.kind.quadratic:
        res = forward_backward_sweep(model, cost, mesh, config)
        if not res.converged:
            log.info("sweep for %s did not converge; falling back to projected gradient", cost.kind.value)
            res = replace(projected_gradient(model, cost, mesh, config), method="pg-fallback")
    else:
        res = projected_gradient(model, cost, mesh, config)
    return replace(res, elapsed=time.perf_counter() - start)
