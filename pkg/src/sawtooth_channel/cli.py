"""Command-line experiment runner.

One subcommand per scenario; each accepts --config (key = value file laid
over the scenario defaults), --out, --seeds and --threads.  Exit codes:
0 success, 1 validation failure, 2 resource failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .channel import ResourceBudgetError
from .experiments import (
    SCENARIOS,
    ConfigError,
    default_config,
    load_config,
    run,
    validate_config,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RESOURCE = 2


def _parse_seed_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sawtooth-channel",
        description="Run dephasing-channel experiments and emit CSV/JSON results.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", help="key = value config file laid over the defaults")
        p.add_argument("--out", help="output directory (default: results)")
        p.add_argument("--seeds", type=_parse_seed_list, help="comma-separated seed list")
        p.add_argument("--threads", type=int, help="worker threads (default: 1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            config = load_config(args.config, args.scenario)
        else:
            config = default_config(args.scenario)
        overrides = {}
        if args.seeds is not None:
            overrides["seeds"] = args.seeds
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.threads is not None:
            overrides["threads"] = args.threads
        if overrides:
            config = dataclasses.replace(config, **overrides)
        validate_config(config)
        result = run(config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceBudgetError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    print(f"wrote {result['csv']} and {result['json']} in {result['wall_clock_seconds']:.1f}s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
