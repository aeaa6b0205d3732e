"""Command-line interface: run, sweep and replay subcommands.

Configuration precedence: built-in defaults < --config JSON file < flags.
The config file mirrors ExperimentConfig; nested sections `variation`,
`limits` and `sim` take the corresponding dataclass fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .genome import GenomeFormatError, MorphLimits
from .phenotype import SimConfig
from .runner import (
    ConfigError,
    ExperimentConfig,
    SweepSpec,
    replay,
    resolve_config,
    run,
    sweep,
)
from .variation import VariationConfig


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


_SECTION_TYPES = {"variation": VariationConfig, "limits": MorphLimits, "sim": SimConfig}


def _config_from(file_values: dict, overrides: dict) -> ExperimentConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    for key, value in merged.items():
        if key in _SECTION_TYPES and isinstance(value, dict):
            try:
                kwargs[key] = _SECTION_TYPES[key](**value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid configuration: {key}: {exc}") from exc
        elif key == "dump_checkpoints":
            kwargs[key] = tuple(int(g) for g in value)
        else:
            kwargs[key] = value
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="base seed (repetition i uses seed+i)")
    parser.add_argument("--repetitions", type=int, help="independent runs per setting")
    parser.add_argument("--generations", type=int, help="generations per run")
    parser.add_argument("--population", type=int, help="population / batch size")
    parser.add_argument("--init-size", type=int, dest="init_size",
                        help="initial population size (default per algorithm)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--strict-budget", action="store_true", default=None,
                        dest="strict_budget",
                        help="count initialization inside the evaluation budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evomod",
        description="Evolve modular robot morphology and control; compare "
        "EA, NSGA-II and MAP-Elites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one algorithm with repetitions")
    p_run.add_argument("--algorithm", choices=("ea", "nsga2", "map_elites"))
    _add_common_flags(p_run)
    p_run.add_argument("--dump-checkpoints", dest="dump_checkpoints",
                       help="comma-separated generations at which to dump the archive")

    p_sweep = sub.add_parser("sweep", help="rank all variation-rate combinations")
    _add_common_flags(p_sweep)

    p_replay = sub.add_parser("replay", help="re-evaluate a serialized genome")
    p_replay.add_argument("genome", help="genome JSON file")
    p_replay.add_argument("--trajectory", help="write per-step root trajectory CSV here")
    p_replay.add_argument("--config", help="JSON config file (limits & sim sections)")

    return parser


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    file_values = _load_config_file(args.config) if args.config else {}
    overrides = {
        "seed": args.seed,
        "repetitions": args.repetitions,
        "generations": args.generations,
        "population": args.population,
        "init_size": args.init_size,
        "out_dir": args.out,
        "strict_budget": args.strict_budget,
    }
    if getattr(args, "algorithm", None):
        overrides["algorithm"] = args.algorithm
    if getattr(args, "dump_checkpoints", None):
        overrides["dump_checkpoints"] = tuple(
            int(g) for g in args.dump_checkpoints.split(",")
        )
    return _config_from(file_values, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _experiment_config(args)
            resolve_config(config)  # fail on bad fields before any compute
            for paths in run(config):
                print(f"run {paths.algorithm} seed={paths.seed}: wrote {paths.stats}")
        elif args.command == "sweep":
            config = _experiment_config(args)
            ranking = sweep(SweepSpec(), config, repetitions=config.repetitions)
            print(f"sweep ranking written to {ranking}")
        elif args.command == "replay":
            file_values = _load_config_file(args.config) if args.config else {}
            limits = MorphLimits(**file_values.get("limits", {}))
            sim = SimConfig(**file_values.get("sim", {}))
            fitness, descriptor = replay(
                Path(args.genome),
                limits,
                sim,
                Path(args.trajectory) if args.trajectory else None,
            )
            print(f"fitness={fitness!r} descriptor=({descriptor.m},{descriptor.j})")
    except (ConfigError, GenomeFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
