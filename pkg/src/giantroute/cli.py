"""
Command-line entry point.

Usage::

    giantroute evolve --config run.json --out results/
    giantroute scatter --config point.json --format json
    giantroute sweep --config sweep.json --threads 4
    giantroute catch-release --config catch.json
    giantroute preset fig2a --out results/fig2a

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures.  On failure an ``error.json`` record is written to the output
directory and the same record is printed to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
import warnings
from pathlib import Path

from . import __version__
from .config import parse_config
from .errors import ConfigWarning, ConfigurationError, IntegrationError, SingularPointError
from .presets import PRESETS
from .runner import run_preset, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SCENARIO_COMMANDS = ("evolve", "scatter", "sweep", "catch-release")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON scenario file (defaults are used when omitted)")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (default: output.dir from the config, or 'out')")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="table format (default: output.format from the config, or csv)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker processes for independent sweep points (default: all cores)")
    common.add_argument("--dt", type=float, default=None, help="integrator time step")
    common.add_argument("--strict", action="store_true",
                        help="treat unknown config keys as errors instead of warnings")

    parser = argparse.ArgumentParser(prog="giantroute", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIO_COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run a '{name}' scenario")
    p = sub.add_parser("preset", parents=[common], help="reproduce one figure's data")
    p.add_argument("name", choices=PRESETS)
    return parser


def _error_record(exc, status) -> dict:
    return {
        "status": status,
        "error": type(exc).__name__,
        "message": str(exc),
        "field": getattr(exc, "field", None),
        "dt": getattr(exc, "dt", None),
    }


def _report(record, out_dir):
    text = json.dumps(record, sort_keys=True)
    print(text, file=sys.stderr)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "error.json").write_text(text + "\n", encoding="utf-8")
        except OSError:
            pass


def _load(args):
    overrides = {"task": args.command}
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.config is None:
        return parse_config("{}", strict=args.strict, overrides=overrides)
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", field="config") from exc
    # Non-strict unknown keys are reported once, from the manifest.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConfigWarning)
        return parse_config(text, strict=args.strict, overrides=overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out
    try:
        if args.command == "preset":
            out_dir = out_dir or Path("out") / args.name
            manifest = run_preset(args.name, out_dir, args.format or "csv", args.threads,
                                  args.dt if args.dt is not None else 0.01)
        else:
            cfg = _load(args)
            out_dir = out_dir or Path(cfg.output.dir)
            manifest = run_scenario(cfg, out_dir, args.format, args.threads)
    except ConfigurationError as exc:
        _report(_error_record(exc, EXIT_CONFIG), out_dir)
        return EXIT_CONFIG
    except (IntegrationError, SingularPointError, FloatingPointError) as exc:
        record = _error_record(exc, EXIT_NUMERICAL)
        record["traceback"] = traceback.format_exc(limit=3)
        _report(record, out_dir)
        return EXIT_NUMERICAL
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for path in manifest.outputs:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
