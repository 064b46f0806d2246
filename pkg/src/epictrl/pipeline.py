"""End-to-end runs: baseline, per-kind optimisation, cost-effectiveness, files."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .cea import CeaRanking, Strategy, cost_matrix, effectiveness, rank_all
from .cost import CostKind, CostSpec, cost_vector
from .mesh import ControlGrid, quadrature
from .scenario import ScenarioConfig
from .solvers import SolveResult, solve
from .trajectory import Trajectory, integrate_forward

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RunArtifacts:
    config: ScenarioConfig
    mode: str
    baseline: Trajectory
    strategies: tuple[Strategy, ...]
    rankings: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    # fixed-control run (simulate mode only)
    simulation: Optional[Strategy] = None

    @property
    def all_converged(self) -> bool:
        return not self.failures and all(s.solve_result.converged for s in self.strategies)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _baseline(cfg: ScenarioConfig) -> Trajectory:
    model = cfg.model_spec()
    mesh = cfg.mesh()
    zero = ControlGrid.constant(mesh, 0.0, None if model.n_controls == 1 else 0.0)
    return integrate_forward(model, model.x0, zero, mesh)


def _solve_one(cfg: ScenarioConfig, kind: CostKind) -> SolveResult:
    return solve(cfg.model_spec(), CostSpec(kind, cfg.a1, cfg.a2), cfg.mesh(), cfg.solve_config())


def _strategy(cfg, label, result: SolveResult, baseline: Trajectory) -> Strategy:
    model = cfg.model_spec()
    costs = cost_matrix([result], model, cfg.a1, cfg.a2)[0]
    return Strategy(label, costs, effectiveness(baseline, result.trajectory), result)


def run_pipeline(
    cfg: ScenarioConfig, kinds: Optional[Sequence] = None, threads: int = 1, mode: str = "cea"
) -> RunArtifacts:
    """Solve every requested kind and run the cost-effectiveness analysis.

    Solver exceptions are recorded under ``failures`` and the remaining
    kinds still run. With ``threads > 1`` the kinds are solved in separate
    processes; results do not depend on the thread count.
    """
    kinds = tuple(CostKind.parse(k) for k in (kinds or cfg.kinds))
    baseline = _baseline(cfg)
    results: dict[CostKind, SolveResult] = {}
    failures = {}
    if threads > 1 and len(kinds) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(kinds))) as pool:
            futures = {k: pool.submit(_solve_one, cfg, k) for k in kinds}
            for k, fut in futures.items():
                try:
                    results[k] = fut.result()
                except Exception as exc:  # recorded, pipeline continues
                    failures[k.value] = f"{type(exc).__name__}: {exc}"
    else:
        for k in kinds:
            try:
                results[k] = _solve_one(cfg, k)
            except Exception as exc:
                failures[k.value] = f"{type(exc).__name__}: {exc}"
    for k, res in results.items():
        log.info("%s: method=%s iterations=%d converged=%s J=%.10g", k.value, res.method, res.iterations, res.converged, res.objective)
    strategies = tuple(_strategy(cfg, k.value, results[k], baseline) for k in kinds if k in results)
    rankings = rank_all(strategies, cfg.effectiveness_tie_tol) if strategies else {}
    return RunArtifacts(cfg, mode, baseline, strategies, rankings, failures)


def simulate(cfg: ScenarioConfig) -> RunArtifacts:
    """Integrate the model under the configured constant control (default: none)."""
    model = cfg.model_spec()
    mesh = cfg.mesh()
    u = cfg.fixed_control.get("u", 0.0)
    v = None if model.n_controls == 1 else cfg.fixed_control.get("v", 0.0)
    ctrl = ControlGrid.constant(mesh, u, v)
    traj = integrate_forward(model, model.x0, ctrl, mesh)
    baseline = _baseline(cfg)
    sim = Strategy(
        "fixed",
        cost_vector(traj, ctrl, model, cfg.a1, cfg.a2),
        effectiveness(baseline, traj),
        _FixedRun(ctrl, traj),
    )
    return RunArtifacts(cfg, "simulate", baseline, (), {}, {}, sim)


@dataclass(frozen=True, eq=False)
class _FixedRun:
    control: ControlGrid
    trajectory: Trajectory


def _write_csv(path: Path, header, rows):
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _trajectory_rows(traj: Trajectory):
    for t, x in zip(traj.t.tolist(), traj.states.tolist()):
        yield [t, *x]


def _control_rows(ctrl: ControlGrid):
    t = ctrl.mesh.nodes[:-1].tolist()
    cols = ctrl.as_array().T.tolist()
    for ti, c in zip(t, cols):
        yield [ti, *c]


def _ranking_rows(rankings: dict[CostKind, CeaRanking]):
    for kind, ranking in rankings.items():
        for row in ranking.rows:
            yield [kind.value, row.label, row.rank, row.dominated, row.icer, row.acer]


def emit_outputs(artifacts: RunArtifacts, out_dir) -> list[Path]:
    """Write CSV tables and a JSON manifest; return the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    cfg = artifacts.config
    names = list(artifacts.baseline.names)
    control_header = ["t", "u"] if len(names) == 3 else ["t", "u", "v"]
    written = [_write_csv(out / "trajectory_baseline.csv", ["t", *names], _trajectory_rows(artifacts.baseline))]

    runs = list(artifacts.strategies)
    if artifacts.simulation is not None:
        runs.append(artifacts.simulation)
    for s in runs:
        written.append(
            _write_csv(out / f"trajectory_{s.label}.csv", ["t", *names], _trajectory_rows(s.solve_result.trajectory))
        )
        written.append(_write_csv(out / f"control_{s.label}.csv", control_header, _control_rows(s.solve_result.control)))
    written.append(
        _write_csv(
            out / "cost_matrix.csv",
            ["strategy", "c1", "c2", "c3", "c4", "effectiveness"],
            ([s.label, *s.costs, s.effectiveness] for s in runs),
        )
    )
    baseline_integral = quadrature(artifacts.baseline["I"], artifacts.baseline.mesh)
    written.append(
        _write_csv(
            out / "effectiveness.csv",
            ["strategy", "effectiveness", "integral_I_baseline", "integral_I_controlled"],
            (
                [s.label, s.effectiveness, baseline_integral, quadrature(s.solve_result.trajectory["I"], artifacts.baseline.mesh)]
                for s in runs
            ),
        )
    )
    if artifacts.rankings:
        written.append(
            _write_csv(
                out / "ranking.csv",
                ["kind", "strategy", "rank", "dominated", "icer", "acer"],
                _ranking_rows(artifacts.rankings),
            )
        )

    solver_report = {}
    for s in artifacts.strategies:
        r = s.solve_result
        solver_report[s.label] = {
            "method": r.method,
            "iterations": r.iterations,
            "converged": r.converged,
            "objective": r.objective,
            "stationarity_residual": r.stationarity_residual,
            "fixed_point_residual": r.fixed_point_residual,
            "message": r.message,
        }
    manifest = {
        "tool": "epictrl",
        "version": __version__,
        "mode": artifacts.mode,
        "config": cfg.to_dict(),
        "assumed": list(cfg.assumed),
        "baseline_integral_I": baseline_integral,
        "solvers": solver_report,
        "failures": dict(artifacts.failures),
        "all_converged": artifacts.all_converged,
        "files": [p.name for p in written],
    }
    path = out / "manifest.json"
    try:
        path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    written.append(path)
    return written
