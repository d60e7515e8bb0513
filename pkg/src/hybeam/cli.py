"""Command line interface.

    hybeam run --preset fig2 --seed 42 --out fig2.csv --workers 4
    hybeam run --config scenario.json
    hybeam list-presets
    hybeam validate --config scenario.json

Exit code 0 on success; on failure a JSON error line goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import BeamformError
from .harness import load_config, override, run_scenario, validate_config, write_csv
from .presets import preset, preset_summaries


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write a CSV")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON scenario file")
    src.add_argument("--preset", help="name of a built-in scenario")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--trials", type=int, default=None, help="override the trial count")
    run.add_argument("--out", default=None, help="override the output CSV path")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    run.add_argument(
        "--timing",
        action="store_true",
        help="record wall times per record (breaks byte-level reproducibility)",
    )
    run.add_argument("--debug", action="store_true", help="verbose logging")

    sub.add_parser("list-presets", help="list built-in scenarios")

    val = sub.add_parser("validate", help="check a JSON scenario file")
    val.add_argument("--config", required=True)
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else preset(args.preset)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["out_path"] = args.out
    if overrides:
        config = override(config, **overrides)
    if args.debug:
        logging.basicConfig(level=logging.DEBUG)
    records = run_scenario(config, workers=args.workers, timing=args.timing)
    write_csv(records, config.out_path)
    print(f"wrote {len(records)} records to {config.out_path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-presets":
            for name, summary in preset_summaries():
                print(f"{name:12s} {summary}")
            return 0
        validate_config(load_config(args.config))
        print("ok")
        return 0
    except (BeamformError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
