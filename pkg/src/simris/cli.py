"""Command-line entry point: ``simris run|summarize|validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .errors import SimrisError
from .harness import config_to_string, format_summary, load_config, read_csv, run_experiment, summarize


def _parser():
    p = argparse.ArgumentParser(prog="simris", description="SIM channel gain experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run an experiment config"), ("validate", "check a config and print it resolved")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--output", help="CSV output path")
    sp = sub.add_parser("summarize", help="summarize a results CSV")
    sp.add_argument("csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args):
    cfg = load_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.output is not None:
        overrides["output_path"] = args.output
    return replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            print(config_to_string(_load(args)), end="")
        elif args.command == "run":
            cfg = _load(args)
            records = run_experiment(cfg)
            print(format_summary(summarize(records)))
            if cfg.output_path:
                print(f"\nwrote {len(records)} records to {cfg.output_path}")
        else:
            print(format_summary(summarize(read_csv(args.csv))))
    except (SimrisError, OSError, ValueError) as exc:
        print(f"simris: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
