import numpy as np
import pytest

from epictrl import ALL_KINDS, ControlGrid, CostSpec, SolveConfig, TimeMesh, evaluate_j
from epictrl.cost import UnsupportedKindError, hamiltonian_gradient
from epictrl.solvers import forward_backward_sweep, projected_gradient, solve
from epictrl.trajectory import discrete_gradient, integrate_adjoint_backward, integrate_forward, node_controls

from oracles import bang_bang_fraction, fd_gradient_error, objective

COARSE = 200


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_gradient_matches_finite_differences(sir_model, seirs_model, kind):
    rng = np.random.default_rng(5)
    for model in (sir_model, seirs_model):
        a = rng.uniform(size=(model.n_controls, COARSE))
        assert fd_gradient_error(model, kind, a, n_probe=8) < 1e-4


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_discrete_gradient_approximates_hamiltonian_slope(seirs_model, kind):
    """Mesh-refined agreement between the exact discrete and the continuous-adjoint gradient."""
    mesh = TimeMesh(0.0, 100.0, 800)
    ctrl = ControlGrid.constant(mesh, 0.4, 0.2)
    cost = CostSpec(kind)
    traj = integrate_forward(seirs_model, seirs_model.x0, ctrl)
    adj = integrate_adjoint_backward(seirs_model, traj, ctrl, cost)
    grad = discrete_gradient(seirs_model, traj, ctrl, cost)
    slope = np.empty_like(grad)
    for k in range(mesh.n_steps):
        c = node_controls(seirs_model, ctrl, k)
        left = hamiltonian_gradient(cost, seirs_model, traj.states[k], adj.lambdas[k], c)
        right = hamiltonian_gradient(cost, seirs_model, traj.states[k + 1], adj.lambdas[k + 1], c)
        slope[:, k] = 0.5 * mesh.h * (np.array(left) + np.array(right))
    assert np.linalg.norm(grad - slope) / np.linalg.norm(grad) < 1e-2


@pytest.mark.usefixtures("no_weight_warning")
@pytest.mark.parametrize("kind", ["QSI", "QSD"])
def test_prohibitive_price_keeps_control_off(sir_model, kind):
    res = forward_backward_sweep(sir_model, CostSpec(kind, 100.0, 1e12), COARSE)
    assert res.converged
    assert np.max(res.control.u) < 1e-3


def test_sweep_rejects_linear_kind(sir_model):
    with pytest.raises(UnsupportedKindError):
        forward_backward_sweep(sir_model, CostSpec("LSD"), COARSE)


def test_dispatch_tags(sir_model):
    assert solve(sir_model, CostSpec("QSD"), COARSE).method == "fbs"
    assert solve(sir_model, CostSpec("LSD"), COARSE, SolveConfig(max_iters=5)).method == "pg"
    fallback = solve(sir_model, CostSpec("QSI"), COARSE, SolveConfig(max_iters=1))
    assert fallback.method == "pg-fallback"
    assert not fallback.converged and fallback.iterations == 1


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_projected_gradient_is_monotone_and_feasible(seirs_model, kind):
    res = projected_gradient(seirs_model, CostSpec(kind), COARSE, SolveConfig(max_iters=40))
    hist = np.array(res.history)
    assert np.all(np.diff(hist) <= 0.0)
    assert res.objective == hist[-1] < hist[0]
    assert res.control.in_bounds()
    assert res.objective == evaluate_j(res.trajectory, res.control, CostSpec(kind), seirs_model)


def test_projected_gradient_warm_start_is_clipped(sir_model):
    mesh = TimeMesh(0.0, 100.0, COARSE)
    start = ControlGrid.constant(mesh, 1.7)
    res = projected_gradient(sir_model, CostSpec("QSD"), mesh, SolveConfig(max_iters=1), initial=start)
    assert res.history[0] == pytest.approx(objective(sir_model, CostSpec("QSD"), mesh, np.ones((1, COARSE))))


def test_solve_is_deterministic(seirs_model):
    runs = [solve(seirs_model, CostSpec("LSI"), COARSE, SolveConfig(max_iters=30)) for _ in range(2)]
    assert runs[0].control == runs[1].control
    assert runs[0].objective == runs[1].objective and runs[0].history == runs[1].history


def test_sweep_result_is_a_fixed_point(seirs_model):
    cfg = SolveConfig()
    res = forward_backward_sweep(seirs_model, CostSpec("QSD"), COARSE, cfg)
    assert res.converged
    assert res.fixed_point_residual < cfg.control_tol
    assert np.max(np.abs(res.node_control[:, -1])) < 1e-6


def test_solve_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(damping=0.0)
    with pytest.raises(ValueError):
        SolveConfig(control_tol=-1.0)
    with pytest.raises(ValueError):
        SolveConfig(max_iters=0)


# the checks below reuse the shared full-resolution preset runs


def _result(run, label):
    return next(s.solve_result for s in run.strategies if s.label == label)


def test_preset_methods_and_convergence(sir_run, seirs_run):
    for run in (sir_run, seirs_run):
        assert run.all_converged
        assert {s.label: s.solve_result.method for s in run.strategies} == {
            "QSI": "fbs",
            "QSD": "fbs",
            "LSI": "pg",
            "LSD": "pg",
        }
        for s in run.strategies:
            assert s.solve_result.control.in_bounds()


def test_optimised_controls_beat_constant_policies(sir_run, seirs_run):
    for run in (sir_run, seirs_run):
        model = run.config.model_spec()
        mesh = run.config.mesh()
        for s in run.strategies:
            cost = s.solve_result.cost
            nc = model.n_controls
            j0 = objective(model, cost, mesh, np.zeros((nc, mesh.n_steps)))
            j1 = objective(model, cost, mesh, np.ones((nc, mesh.n_steps)))
            assert s.solve_result.objective <= min(j0, j1)


def test_quadratic_presets_meet_optimality_conditions(sir_run, seirs_run):
    for run in (sir_run, seirs_run):
        for label in ("QSI", "QSD"):
            res = _result(run, label)
            assert res.fixed_point_residual < SolveConfig().control_tol
            assert np.max(np.abs(res.node_control[:, -1])) < 1e-6
    for label in ("QSI", "QSD"):
        assert _result(sir_run, label).stationarity_residual < 1e-3 * 100.0


def test_treatment_profile_decreases_to_zero(sir_run):
    u = _result(sir_run, "QSI").control.u
    assert u[:50].mean() > 0.9
    assert u[-1] < 0.05
    tail = u[np.argmax(u):]
    assert np.all(np.diff(tail) <= 1e-9)


def test_linear_state_independent_control_is_bang_bang(sir_run):
    assert bang_bang_fraction(_result(sir_run, "LSI").control) >= 0.9


def test_projected_gradient_preset_histories_are_monotone(sir_run, seirs_run):
    for run in (sir_run, seirs_run):
        for label in ("LSI", "LSD"):
            assert np.all(np.diff(_result(run, label).history) <= 0.0)
