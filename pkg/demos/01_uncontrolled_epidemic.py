"""Uncontrolled SIR and SEIRS outbreaks on the preset parameters.

Integrates both models with no intervention, prints a few snapshots of the
infected curve and the cumulative infection-days that later serve as the
cost-effectiveness baseline.
"""
import numpy as np

from epictrl import ControlGrid, integrate_forward, quadrature
from epictrl.scenario import preset

for name in ("sir-ebola-2015", "seirs-trawicki-2017"):
    cfg = preset(name)
    model = cfg.model_spec()
    mesh = cfg.mesh()
    zero = ControlGrid.constant(mesh, 0.0, None if model.n_controls == 1 else 0.0)
    traj = integrate_forward(model, model.x0, zero)

    print(f"== {name} ({model.kind.upper()}, {mesh.n_steps} RK4 steps)")
    for day in (0, 10, 25, 50, 100):
        k = int(round(day / mesh.h))
        print(f"  day {day:3d}: " + "  ".join(f"{c}={v:9.1f}" for c, v in zip(traj.names, traj.states[k])))
    peak = int(np.argmax(traj["I"]))
    print(f"  peak prevalence {traj['I'][peak]:.0f} on day {traj.t[peak]:.1f}")
    print(f"  infection-days over the horizon: {quadrature(traj['I'], mesh):.2f}")
    drift = np.max(np.abs(traj.states.sum(axis=1) - model.n0)) / model.n0
    print(f"  population drift: {drift:.1e}")
