"""Command-line entry point: ``langevin-schemes run <config>`` and ``langevin-schemes list``."""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import REGISTRY, U64_MAX, ConfigError, ExperimentConfig, run_experiment


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="langevin-schemes",
                                description="Run Langevin discretization experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config", help="path to the JSON config")
    run.add_argument("--seed", type=_seed, help="override the config seed")
    run.add_argument("--out", help="write results into this directory")
    sub.add_parser("list", help="list the available experiments")
    return p


def load_config(path, seed=None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if isinstance(raw, dict) and seed is not None:
        raw["seed"] = seed
    return ExperimentConfig.from_dict(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        width = max(map(len, REGISTRY))
        for name, spec in REGISTRY.items():
            print(f"{name:<{width}}  {spec.description}")
        return 0
    try:
        cfg = load_config(args.config, args.seed)
        result, csv_path, json_path = run_experiment(cfg, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {cfg.experiment} failed: {exc}", file=sys.stderr)
        return 2
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  value={c.value}  bound={c.bound}")
    print(f"wrote {csv_path} and {json_path}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
