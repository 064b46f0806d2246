"""Uniform time meshes, piecewise-constant control grids and quadrature."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class MeshMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TimeMesh:
    t0: float
    tf: float
    n_steps: int

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError(f"tf must exceed t0 (got t0={self.t0}, tf={self.tf})")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer (got {self.n_steps})")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.tf, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        t = self.nodes
        return 0.5 * (t[:-1] + t[1:])


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Controls held constant on each mesh interval.

    ``u`` is the treatment rate per interval; ``v`` the vaccination rate
    (``None`` for single-control models).
    """

    mesh: TimeMesh
    u: np.ndarray
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.mesh.n_steps
        u = _frozen(np.broadcast_to(np.asarray(self.u, dtype=float), (n,)))
        object.__setattr__(self, "u", u)
        if self.v is not None:
            object.__setattr__(self, "v", _frozen(np.broadcast_to(np.asarray(self.v, dtype=float), (n,))))

    @classmethod
    def constant(cls, mesh: TimeMesh, u: float = 0.0, v: Optional[float] = None) -> "ControlGrid":
        return cls(mesh, np.full(mesh.n_steps, u), None if v is None else np.full(mesh.n_steps, v))

    @property
    def n_controls(self) -> int:
        return 1 if self.v is None else 2

    def as_array(self) -> np.ndarray:
        """Controls stacked as an ``(n_controls, n_steps)`` array."""
        if self.v is None:
            return self.u[None, :].copy()
        return np.vstack([self.u, self.v])

    @classmethod
    def from_array(cls, mesh: TimeMesh, a: np.ndarray) -> "ControlGrid":
        a = np.atleast_2d(a)
        return cls(mesh, a[0], a[1] if a.shape[0] > 1 else None)

    def in_bounds(self) -> bool:
        a = self.as_array()
        return bool(np.all(a >= 0.0) and np.all(a <= 1.0))

    def __eq__(self, other):
        if not isinstance(other, ControlGrid):
            return NotImplemented
        return self.mesh == other.mesh and np.array_equal(self.as_array(), other.as_array())


def quadrature(samples, mesh: TimeMesh) -> float:
    """Composite trapezoidal rule over the mesh nodes."""
    y = np.asarray(samples, dtype=float)
    if y.shape != (mesh.n_steps + 1,):
        raise MeshMismatchError(f"expected {mesh.n_steps + 1} samples, got {y.shape}")
    return float(mesh.h * (0.5 * y[0] + y[1:-1].sum() + 0.5 * y[-1]))
