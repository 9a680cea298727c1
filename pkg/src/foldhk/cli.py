"""Command line: ``foldhk {nahm,laplacian,cotangent,verify} [--config] [--out] [--seed]``.

Exit status 0 when every check passes, 1 when a check fails and 2 on usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError, load_config, validate
from .suites import emit_tables, run_suite

log = logging.getLogger("foldhk")

COMMANDS = {"nahm": "nahm", "laplacian": "laplacian", "cotangent": "cotangent", "verify": "all"}


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foldhk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "nahm": "integrate the Nahm flow and check the reconstructed triple",
        "laplacian": "solve the folded Laplacian mode problems",
        "cotangent": "check the fiberwise cotangent model",
        "verify": "run every suite",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="TOML configuration file (defaults reproduce the acceptance runs)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=_seed, help="seed for randomized sweeps (overrides the config)")
        p.add_argument("-q", "--quiet", action="store_true", help="only report failures")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        overrides = {"suite": COMMANDS[args.command]}
        if args.out is not None:
            overrides["out"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = validate(dataclasses.replace(cfg, **overrides))
    except ConfigError as exc:
        print(f"foldhk: config error: {exc}", file=sys.stderr)
        return 2
    report, tables = run_suite(cfg)
    for c in report.checks:
        if not c.passed or not args.quiet:
            log.log(logging.INFO if c.passed else logging.WARNING, "%s  (%.2fs)", c.line(), c.wall_time)
    try:
        paths = emit_tables(report, tables, cfg.out)
    except OSError as exc:
        print(f"foldhk: cannot write results: {exc}", file=sys.stderr)
        return 2
    log.info("wrote %d files to %s", len(paths), cfg.out)
    return 0 if report.verdict else 1
