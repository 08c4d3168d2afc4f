"""Command-line entry point.

Subcommands mirror the experiment runners in bench.py plus two utilities
(instance generation, schedule digitization). Options can come from a JSON
config file, command-line flags, or both; flags win.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .bench import (
    ExperimentConfig,
    digitize_schedule_file,
    generate_pool_files,
    run_experiment,
    write_outputs,
)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    parser.add_argument("--seed", type=int, help="root seed for all derived streams")
    parser.add_argument("--outdir", help="output directory (default: results)")
    parser.add_argument("-n", type=int, dest="n", help="variables per instance")
    parser.add_argument("-m", type=int, dest="m", help="clauses per instance")
    parser.add_argument("--instances", type=int, help="number of test instances")
    parser.add_argument("--train-instances", type=int, help="number of training instances")
    parser.add_argument("--dt", type=float, help="integrator step")
    parser.add_argument(
        "--times", help="comma-separated annealing times, e.g. 25,50,100"
    )
    parser.add_argument(
        "--instance-file", action="append", default=None, metavar="PATH",
        help="use this instance JSON instead of generating (repeatable)",
    )
    parser.add_argument("--episodes", type=int, help="tree-search episodes per instance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annealdesign",
        description="Design annealing schedules for 3-SAT via tree search and compare baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("gen", "write a seeded pool of satisfiable instances as JSON files"),
        ("sweep", "success probability vs annealing time for all optimizers"),
        ("compare", "tree search vs stochastic descent at matched query budgets"),
        ("transfer", "apply schedules and pre-trained networks across instances"),
        ("efficiency", "best energy vs cumulative queries, paired seeds"),
        ("diagnose", "spectral gaps and excess-energy traces"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    p = sub.add_parser("digitize", help="convert a schedule JSON into per-slice gate angles")
    p.add_argument("schedule", type=Path, help="schedule JSON file")
    p.add_argument("--slices", type=int, required=True, help="number of time slices")
    p.add_argument("--out", type=Path, help="output path (default: stdout)")
    return parser


_EXPERIMENT_OF = {
    "sweep": "sweep",
    "compare": "compare",
    "transfer": "transfer",
    "efficiency": "efficiency",
    "diagnose": "diagnostics",
    "gen": "sweep",  # placeholder; gen only uses pool fields
}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_json(args.config.read_text())
    else:
        cfg = ExperimentConfig()
    cfg = dataclasses.replace(cfg, experiment=_EXPERIMENT_OF[args.command])

    overrides = {}
    for flag, field_name in (
        ("seed", "seed"),
        ("outdir", "outdir"),
        ("n", "n"),
        ("m", "m"),
        ("instances", "test_instances"),
        ("train_instances", "train_instances"),
        ("dt", "dt"),
        ("episodes", "mcts_episodes"),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[field_name] = value
    if args.times is not None:
        overrides["t_values"] = tuple(float(t) for t in args.times.split(","))
    if args.instance_file:
        overrides["instance_files"] = tuple(args.instance_file)
    return dataclasses.replace(cfg, **overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "digitize":
        doc = digitize_schedule_file(args.schedule.read_text(), args.slices)
        if args.out is not None:
            args.out.write_text(doc)
            print(f"wrote {args.out}")
        else:
            print(doc)
        return 0

    try:
        cfg = config_from_args(args)
        cfg.validate()
    except (ValueError, FileNotFoundError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return 2

    if args.command == "gen":
        paths = generate_pool_files(cfg)
        for p in paths:
            print(f"wrote {p}")
        return 0

    report = run_experiment(cfg)
    outdir = write_outputs(cfg, report)
    print(f"wrote {outdir}/results.csv ({len(report.table.rows)} rows)")
    for key, value in report.extras.items():
        if isinstance(value, (int, float, str)):
            print(f"{key}: {value}")
        elif key == "mean_success":
            print("mean_success: " + json.dumps(value))
    if report.failures:
        print(f"{len(report.failures)} cell(s) failed:", file=sys.stderr)
        for line in report.failures:
            print(f"  {line}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
