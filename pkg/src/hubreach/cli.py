"""Command-line entry point: ``hubreach {validate,analyze,charge-time}``.

Exit status: 0 success, 1 data/domain error, 2 usage or config error.
"""

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .charging import DEFAULT_CHARGERS, format_duration, full_charge_time
from .config import ConfigFileError, load_config
from .ingest import LoadError, RowError
from .pipeline import InputFileMissing, analyze, validate
from .report import ExportError
from .scenario import LONG_RANGE_EV, LOW_RANGE_EV, ConfigurationError

OUTPUT_ENV = "HUBREACH_OUTPUT_DIR"
EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2

logger = logging.getLogger("hubreach")


def _common(parser, config_required=True):
    parser.add_argument("--config", required=config_required, type=Path,
                        help="run configuration (TOML)")
    parser.add_argument("--out", type=Path, help=f"output directory (overrides ${OUTPUT_ENV})")
    parser.add_argument("--workers", type=int, help="worker processes (default: config or CPU count)")
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("--quiet", action="store_true", help="only log errors")
    noise.add_argument("--verbose", action="store_true", help="debug logging")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hubreach",
        description="Hub-and-spoke EV accessibility analysis over a road network.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check inputs and configuration")
    _common(p)
    p = sub.add_parser("analyze", help="run every scenario and write tables and map layers")
    _common(p)
    p = sub.add_parser("charge-time", help="full-charge wait time per charger level")
    _common(p, config_required=False)
    p.add_argument("--vehicle", required=True, help="vehicle name (config vehicles, or the built-in long-range / low-range)")
    p.add_argument("--short", action="store_true", help="render whole hours as '2h'")
    return parser


def _setup_logging(args):
    level = logging.ERROR if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level)
    logger.propagate = False


def _output_dir(args, config):
    if args.out is not None:
        return args.out
    if os.environ.get(OUTPUT_ENV):
        return Path(os.environ[OUTPUT_ENV])
    return config.output_dir


def cmd_validate(args, config):
    diag = validate(config)
    for msg in diag.errors:
        print(f"ERROR: {msg}")
    for msg in diag.warnings:
        print(f"WARNING: {msg}")
    print(f"{len(diag.errors)} error(s), {len(diag.warnings)} warning(s)")
    return EXIT_OK if diag.ok else EXIT_DATA


def cmd_analyze(args, config):
    out = _output_dir(args, config)
    manifest = analyze(config, out, args.workers)
    logger.info("wrote %d scenario(s) to %s", len(manifest["scenarios"]), out)
    return EXIT_OK


def cmd_charge_time(args, config):
    if config is None:
        vehicles = {v.name: v for v in (LONG_RANGE_EV, LOW_RANGE_EV)}
        chargers, rounding = DEFAULT_CHARGERS, "floor"
    else:
        vehicles, chargers, rounding = config.vehicles, config.chargers, config.charge_rounding
    vehicle = vehicles.get(args.vehicle)
    if vehicle is None:
        logger.error("unknown vehicle %r (known: %s)", args.vehicle, ", ".join(sorted(vehicles)))
        return EXIT_DATA
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["vehicle", "charger", "power_kw", "effective_power_kw", "minutes", "duration"])
    for charger in chargers:
        est = full_charge_time(vehicle, charger, rounding)
        text = format_duration(est.duration_minutes, short=args.short)
        writer.writerow([vehicle.name, charger.label, f"{charger.power_kw:g}",
                         f"{est.effective_power_kw:g}", est.duration_minutes, text])
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "analyze": cmd_analyze, "charge-time": cmd_charge_time}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    _setup_logging(args)
    if args.workers is not None and args.workers < 1:
        logger.error("--workers must be >= 1")
        return EXIT_USAGE
    try:
        config = None if args.config is None else load_config(args.config)
    except ConfigFileError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, config)
    except (InputFileMissing, LoadError, RowError, ConfigurationError, ExportError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
