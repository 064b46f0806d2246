import math

import numpy as np
import pytest

from epictrl import ALL_KINDS, ControlGrid, CostSpec, ModelSpec, SirParams, TimeMesh, quadrature
from epictrl.mesh import MeshMismatchError
from epictrl.trajectory import IntegrationError, integrate_adjoint_backward, integrate_forward

from conftest import SEIRS_PARAMS, SIR_PARAMS

# integral of I over [0, 100] for the uncontrolled presets, computed by an
# independent adaptive 8th-order integrator (rtol 1e-13) on the augmented system
SIR_BASELINE_INTEGRAL = 806129.4672841973
SEIRS_BASELINE_INTEGRAL = 1160390.0884840987


def _no_beta_model():
    return ModelSpec(SirParams(mu=SIR_PARAMS.mu, beta=0.0, gamma=0.1, n0=1e5), (95000.0, 5000.0, 0.0))


def _closed_form_i(t, u):
    return 5000.0 * math.exp(-(0.1 + u + SIR_PARAMS.mu) * t)


def _rel_error_at_tf(n, u):
    model = _no_beta_model()
    mesh = TimeMesh(0.0, 100.0, n)
    traj = integrate_forward(model, model.x0, ControlGrid.constant(mesh, u))
    exact = _closed_form_i(100.0, u)
    return abs(traj["I"][-1] - exact) / exact


@pytest.mark.parametrize("u", [0.0, 0.02, 0.05])
def test_no_transmission_matches_exponential_decay(u):
    assert _rel_error_at_tf(1000, u) < 1e-8


def test_no_transmission_error_scales_with_decay_rate():
    # global RK4 error ~ t (rate h)^4 rate / 120: faster decay needs finer meshes
    assert _rel_error_at_tf(1000, 0.3) < 1e-6
    assert _rel_error_at_tf(4000, 0.3) < 1e-8


def test_convergence_order_is_four():
    errs = [_rel_error_at_tf(n, 0.05) for n in (100, 200, 400)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 3.8


@pytest.mark.parametrize("u", [0.0, 0.4, 1.0])
def test_population_is_conserved(sir_model, seirs_model, u):
    rng = np.random.default_rng(3)
    for model in (sir_model, seirs_model):
        mesh = TimeMesh(0.0, 100.0, 500)
        a = np.clip(u + 0.1 * rng.standard_normal((model.n_controls, 500)), 0, 1)
        traj = integrate_forward(model, model.x0, ControlGrid.from_array(mesh, a))
        assert np.max(np.abs(traj.states.sum(axis=1) - 1e5)) / 1e5 < 1e-9
        assert traj.states.shape == (501, model.n_compartments)
        assert np.all(traj.states >= 0)


def test_baseline_integral_against_independent_oracle(sir_model, seirs_model):
    for model, oracle in ((sir_model, SIR_BASELINE_INTEGRAL), (seirs_model, SEIRS_BASELINE_INTEGRAL)):
        fine = TimeMesh(0.0, 100.0, 16000)
        v = None if model.n_controls == 1 else 0.0
        traj = integrate_forward(model, model.x0, ControlGrid.constant(fine, 0.0, v))
        assert quadrature(traj["I"], fine) == pytest.approx(oracle, rel=1e-8)


def test_baseline_integral_stable_under_mesh_halving(sir_model):
    values = []
    for n in (1000, 2000):
        mesh = TimeMesh(0.0, 100.0, n)
        traj = integrate_forward(sir_model, sir_model.x0, ControlGrid.constant(mesh, 0.0))
        values.append(quadrature(traj["I"], mesh))
    assert abs(values[0] - values[1]) / values[1] < 1e-6
    assert abs(values[0] - SIR_BASELINE_INTEGRAL) / SIR_BASELINE_INTEGRAL < 1e-6


def test_forward_is_bitwise_deterministic(seirs_model):
    mesh = TimeMesh(0.0, 100.0, 300)
    a = np.random.default_rng(0).uniform(size=(2, 300))
    runs = [integrate_forward(seirs_model, seirs_model.x0, ControlGrid.from_array(mesh, a)) for _ in range(2)]
    assert np.array_equal(runs[0].states, runs[1].states)


def test_forward_depends_only_on_past_controls(sir_model):
    mesh = TimeMesh(0.0, 100.0, 100)
    a = np.full(100, 0.2)
    b = a.copy()
    b[60:] = 0.9
    ta = integrate_forward(sir_model, sir_model.x0, ControlGrid(mesh, a))
    tb = integrate_forward(sir_model, sir_model.x0, ControlGrid(mesh, b))
    assert np.array_equal(ta.states[:61], tb.states[:61])
    assert not np.array_equal(ta.states[61], tb.states[61])


def test_non_finite_state_names_the_node():
    model = ModelSpec(SirParams(mu=1e-3, beta=1e300, gamma=0.1, n0=1e5), (95000.0, 5000.0, 0.0))
    mesh = TimeMesh(0.0, 10.0, 10)
    with pytest.raises(IntegrationError) as info:
        integrate_forward(model, model.x0, ControlGrid.constant(mesh, 0.0))
    assert info.value.node == 1


def test_control_count_must_match_model(sir_model):
    mesh = TimeMesh(0.0, 100.0, 10)
    with pytest.raises(ValueError):
        integrate_forward(sir_model, sir_model.x0, ControlGrid.constant(mesh, 0.0, 0.0))


def test_forward_rejects_foreign_mesh(sir_model):
    with pytest.raises(MeshMismatchError):
        integrate_forward(sir_model, sir_model.x0, ControlGrid.constant(TimeMesh(0, 100, 10), 0.0), TimeMesh(0, 100, 20))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_adjoint_terminal_value_and_recovered_costate(sir_model, kind):
    mesh = TimeMesh(0.0, 100.0, 400)
    ctrl = ControlGrid(mesh, np.random.default_rng(1).uniform(size=400))
    traj = integrate_forward(sir_model, sir_model.x0, ctrl)
    adj = integrate_adjoint_backward(sir_model, traj, ctrl, CostSpec(kind))
    assert np.all(adj.lambdas[-1] == 0.0)
    assert np.max(np.abs(adj["R"])) < 1e-10
    assert np.all(np.isfinite(adj.lambdas))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_seirs_adjoint_terminal_value(seirs_model, kind):
    mesh = TimeMesh(0.0, 100.0, 200)
    ctrl = ControlGrid.constant(mesh, 0.3, 0.2)
    traj = integrate_forward(seirs_model, seirs_model.x0, ctrl)
    adj = integrate_adjoint_backward(seirs_model, traj, ctrl, CostSpec(kind))
    assert np.all(adj.lambdas[-1] == 0.0)
    assert adj.lambdas.shape == (201, 4)


@pytest.mark.usefixtures("no_weight_warning")
def test_zero_weight_adjoint_vanishes(sir_model, seirs_model):
    for model in (sir_model, seirs_model):
        mesh = TimeMesh(0.0, 100.0, 100)
        ctrl = ControlGrid.constant(mesh, 0.5, None if model.n_controls == 1 else 0.5)
        traj = integrate_forward(model, model.x0, ctrl)
        adj = integrate_adjoint_backward(model, traj, ctrl, CostSpec("QSD", 0.0, 0.0))
        assert np.all(adj.lambdas == 0.0)


def test_adjoint_rejects_foreign_mesh(sir_model):
    mesh = TimeMesh(0.0, 100.0, 10)
    traj = integrate_forward(sir_model, sir_model.x0, ControlGrid.constant(mesh, 0.0))
    with pytest.raises(MeshMismatchError):
        integrate_adjoint_backward(sir_model, traj, ControlGrid.constant(TimeMesh(0, 100, 20), 0.0), CostSpec("QSI"))


def test_quadrature_examples():
    mesh = TimeMesh(0.0, 100.0, 37)
    assert quadrature(np.full(38, 2.5), mesh) == pytest.approx(250.0, rel=1e-15)
    for n in (1, 2, 7, 1000):
        unit = TimeMesh(0.0, 1.0, n)
        assert quadrature(unit.nodes, unit) == pytest.approx(0.5, abs=1e-15)
    half = TimeMesh(0.0, math.pi, 1000)
    assert abs(quadrature(np.sin(half.nodes), half) - 2.0) < 1e-5


def test_quadrature_length_mismatch():
    with pytest.raises(MeshMismatchError):
        quadrature(np.zeros(5), TimeMesh(0.0, 1.0, 5))


def test_mesh_validation():
    with pytest.raises(ValueError):
        TimeMesh(0.0, 0.0, 10)
    with pytest.raises(ValueError):
        TimeMesh(0.0, 1.0, 0)
    mesh = TimeMesh(0.0, 100.0, 1000)
    assert len(mesh.nodes) == 1001 and mesh.h == pytest.approx(0.1)
    assert mesh.midpoints[0] == pytest.approx(0.05)


def test_control_grid_is_read_only():
    grid = ControlGrid.constant(TimeMesh(0.0, 1.0, 4), 0.5, 0.25)
    with pytest.raises(ValueError):
        grid.u[0] = 1.0
    assert grid.as_array().shape == (2, 4)
    assert grid == ControlGrid.from_array(grid.mesh, grid.as_array())
    assert grid.in_bounds() and not ControlGrid.constant(grid.mesh, 1.5).in_bounds()
