"""Command line entry point: ``epictrl simulate|optimize|cea``.

Exit codes: 0 when every requested strategy converged and all files were
written, 1 when a solver failed or did not converge, 2 for configuration
or I/O errors.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .cost import CostKind
from .models import ScenarioError
from .pipeline import emit_outputs, run_pipeline, simulate
from .scenario import PRESETS, ConfigError, load_scenario, preset, with_overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epictrl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "integrate the model under a fixed control (no optimisation)"),
        ("optimize", "solve the optimal control problem for one cost functional"),
        ("cea", "solve every cost functional and rank the strategies"),
    ):
        p = sub.add_parser(name, help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="JSON scenario file")
        src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
        p.add_argument("--out", help="output directory (default: config output_dir or ./out)")
        p.add_argument("--kind", type=str.upper, choices=[k.value for k in CostKind], help="cost functional")
        p.add_argument("--steps", type=int, help="number of mesh intervals")
        p.add_argument("--threads", type=int, default=1, help="parallel strategy solves (cea)")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = preset(args.preset) if args.preset else load_scenario(args.config)
        cfg = with_overrides(cfg, n_steps=args.steps)
    except (ConfigError, ScenarioError, OSError) as exc:
        print(f"epictrl: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.output_dir or "out"

    if args.command == "simulate":
        artifacts = simulate(cfg)
    elif args.command == "optimize":
        kind = args.kind or cfg.kinds[0].value
        artifacts = run_pipeline(cfg, kinds=[kind], mode="optimize")
    else:
        kinds = [args.kind] if args.kind else None
        artifacts = run_pipeline(cfg, kinds=kinds, threads=args.threads, mode="cea")

    try:
        paths = emit_outputs(artifacts, out)
    except OSError as exc:
        print(f"epictrl: {exc}", file=sys.stderr)
        return 2
    for label, msg in artifacts.failures.items():
        print(f"epictrl: {label} failed: {msg}", file=sys.stderr)
    for s in artifacts.strategies:
        r = s.solve_result
        status = "converged" if r.converged else "NOT converged"
        print(f"{s.label}: {r.method} {status} after {r.iterations} iterations, J={r.objective:.10g}")
    print(f"wrote {len(paths)} files to {out}")
    return 0 if artifacts.all_converged else 1


if __name__ == "__main__":
    sys.exit(main())
