"""Command-line entry points for the benchmark harness."""

from __future__ import annotations

import argparse
import json
import sys

from .datasets import load_csv
from .experiments import ExperimentConfig, export_projection, fit_rate, read_records, run_experiment
from .subspace import load_subspace


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ngca",
        description="Non-Gaussian component analysis benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the sweep described by a JSON config")
    run.add_argument("config", help="path to the experiment config (JSON)")

    rate = sub.add_parser("rate", help="fit a log-log convergence rate from a results CSV")
    rate.add_argument("results", help="path to a results CSV written by `run`")
    rate.add_argument("--algorithm", required=True, help="algorithm id to fit")
    rate.add_argument(
        "--metric", choices=("E", "D"), default="E", help="metric column to fit"
    )

    project = sub.add_parser(
        "project", help="project a data CSV onto a stored subspace"
    )
    project.add_argument("data", help="path to a numeric data CSV")
    project.add_argument("subspace", help="path to a subspace JSON file")
    project.add_argument("output", help="path of the projected CSV to write")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_json_file(args.config)
            records = run_experiment(cfg)
            failed = sum(1 for r in records if r.error_msg)
            print(f"wrote {len(records)} records to {cfg.output} ({failed} failed)")
        elif args.command == "rate":
            records = read_records(args.results)
            fit = fit_rate(records, args.algorithm, args.metric)
            print(
                f"algorithm={args.algorithm} metric={args.metric} "
                f"slope={fit.slope:.6f} stderr={fit.stderr:.6f} "
                f"n_points={fit.n_points}"
            )
        elif args.command == "project":
            X = load_csv(args.data)
            subspace = load_subspace(args.subspace)
            projected = export_projection(X, subspace, args.output)
            print(
                f"wrote {projected.shape[0]} x {projected.shape[1]} projection "
                f"to {args.output}"
            )
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
