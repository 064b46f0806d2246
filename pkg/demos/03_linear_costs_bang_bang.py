"""Treatment priced linearly: projected gradient and the switching function.

With an L1 intervention cost there is no interior minimiser of the
Hamiltonian; the control sits on a bound wherever the switching function is
nonzero. The projected gradient works on the discretised objective
directly, and the result is compared with the sign of the switching function.
"""
import numpy as np

from epictrl import CostSpec, projected_gradient, switching_function
from epictrl.scenario import preset

cfg = preset("sir-ebola-2015")
model = cfg.model_spec()
mesh = cfg.mesh()
cost = CostSpec("LSI")

res = projected_gradient(model, cost, mesh)
u = res.control.u
print(f"LSI: converged={res.converged} after {res.iterations} iterations, J={res.objective:.2f}")
print(f"objective fell from {res.history[0]:.2f} to {res.history[-1]:.2f} without a single increase:",
      bool(np.all(np.diff(res.history) <= 0)))

near_bound = (u < 0.05) | (u > 0.95)
print(f"intervals within 0.05 of a bound: {near_bound.mean():.1%}")

psi = np.array([switching_function(cost, model, x, lam)[0]
                for x, lam in zip(res.trajectory.states[:-1], res.adjoint.lambdas[:-1])])
on = u > 0.95
off = u < 0.05
print(f"switching function on full-treatment intervals: max {psi[on].max():.3g} (negative means treat)")
print(f"switching function on no-treatment intervals:   min {psi[off].min():.3g}")
switch = np.flatnonzero(np.diff(on.astype(int)))
print("switch times (days):", ", ".join(f"{mesh.nodes[k + 1]:.1f}" for k in switch))
