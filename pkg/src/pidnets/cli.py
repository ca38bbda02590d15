"""Command-line experiment runner.

    pidnets run CONFIG [--seed S] [--runs N] [--out DIR] [--threads K]
    pidnets validate CONFIG
    pidnets presets list
    pidnets presets show NAME

CONFIG is either a JSON config file or the name of a preset. ``run`` writes
trajectories.csv, summary.csv, fields.csv (and capacity.csv for the memory
experiment) into the output directory. Exit code 0 on success, 2 on an
invalid configuration, 1 on any other failure. The MNIST directory defaults
to ./data/mnist and can be pointed elsewhere with $PIDNETS_MNIST_DIR.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import config as config_mod
from .runner import run_config


def _load_config(spec: str) -> config_mod.ExperimentConfig:
    if spec in config_mod.preset_names():
        return config_mod.preset(spec)
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"{spec!r} is neither a preset name nor a config file")
    return config_mod.parse(path.read_text())


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.runs is not None:
        overrides["n_runs"] = args.runs
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    problems = config_mod.validate(cfg)
    if problems:
        for p in problems:
            print(f"invalid config: {p}", file=sys.stderr)
        return 2
    if cfg.out_dir is None:
        cfg = dataclasses.replace(cfg, out_dir=f"out/{cfg.experiment}")
    result = run_config(cfg, threads=args.threads, verbose=not args.quiet)
    for key in sorted(result.summary):
        print(f"{key} = {result.summary[key]:.6g}")
    print(f"artifacts written to {cfg.out_dir}")
    return 0


def _cmd_validate(args) -> int:
    try:
        cfg = _load_config(args.config)
    except (ValueError, FileNotFoundError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    problems = config_mod.validate(cfg)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return 2
    print("config is valid")
    return 0


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in config_mod.preset_names():
            cfg = config_mod.preset(name)
            print(f"{name}: {cfg.n_neurons} neurons, {len(cfg.phases)} phase(s), "
                  f"{cfg.n_runs} runs, goal={cfg.goal}")
        return 0
    if args.name is None:
        print("presets show needs a preset name", file=sys.stderr)
        return 2
    print(config_mod.serialize(config_mod.preset(args.name)), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pidnets", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="preset name or JSON config file")
    p_run.add_argument("--seed", type=int, default=None, help="override base_seed")
    p_run.add_argument("--runs", type=int, default=None, help="override n_runs")
    p_run.add_argument("--out", type=str, default=None, help="output directory")
    p_run.add_argument("--threads", type=int, default=1, help="parallel run workers")
    p_run.add_argument("--quiet", action="store_true", help="suppress per-run progress")
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config", help="preset name or JSON config file")
    p_val.set_defaults(fn=_cmd_validate)

    p_pre = sub.add_parser("presets", help="list or show the built-in presets")
    p_pre.add_argument("action", choices=("list", "show"))
    p_pre.add_argument("name", nargs="?", default=None)
    p_pre.set_defaults(fn=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
