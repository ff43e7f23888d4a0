"""Command line entry point: ``pullback-lab run <experiment> [options]``."""
from __future__ import annotations

import argparse
import sys

from .errors import PullbackLabError
from .harness import EXPERIMENTS, ExperimentConfig, load_config, run_experiment

# CLI flag -> config field
FLAG_FIELDS = {"bundle": "bundle", "connection": "connection", "steps": "steps", "samples": "samples",
               "tol": "tolerance", "seed": "seed"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pullback-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment and write CSV + JSON results")
    run.add_argument("experiment", help=f"one of: {', '.join(EXPERIMENTS)}")
    run.add_argument("--config", help="flat JSON object with ExperimentConfig fields")
    run.add_argument("--bundle")
    run.add_argument("--connection")
    run.add_argument("--steps", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="results", help="output directory (default: results)")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data = load_config(args.config) if args.config else {}
    data["experiment"] = args.experiment
    for flag, name in FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data).validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg, args.out)
    except PullbackLabError as e:
        print(f"pullback-lab: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    for m in result.metrics:
        print(f"{'PASS' if m.passed else 'FAIL'}  {m.name} = {m.value:.6g} (tolerance {m.tolerance:g})")
    print(f"{cfg.experiment}: {'PASS' if result.passed else 'FAIL'}; wrote {', '.join(result.artifacts)}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
