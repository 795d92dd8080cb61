"""Command line entry point: ``nirgas run | defaults | validate``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .errors import ConfigError, NirgasError
from .sweep import RunConfig, dump_config, export_csv, export_json, load_config, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_FLAGGED = 0, 1, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="nirgas", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a (delta21 x r) sweep")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, help="output file (default: config 'output' or stdout name)")
    run.add_argument("--format", choices=("csv", "json"), default=None)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--method", choices=("integrate", "scf"), default=None)
    run.add_argument("--phases", type=int, default=None, help="loop-phase samples K")

    sub.add_parser("defaults", help="print the resolved default configuration")

    val = sub.add_parser("validate", help="check a configuration without running")
    val.add_argument("--config", required=True, type=Path)
    return p


def _apply_overrides(cfg, args):
    changes = {}
    if args.method:
        changes["solver"] = dataclasses.replace(cfg.solver, method=args.method)
    if args.phases is not None:
        changes["phases"] = args.phases
    return dataclasses.replace(cfg, **changes) if changes else cfg


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    if args.command == "defaults":
        print(dump_config(RunConfig()))
        return EXIT_OK

    try:
        cfg = load_config(args.config)
        if args.command == "run":
            cfg = _apply_overrides(cfg, args)
    except (ConfigError, NirgasError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"ok: {cfg.delta_count} detunings x {len(cfg.pump_rates)} pump rates")
        return EXIT_OK

    out = args.out or (Path(cfg.output) if cfg.output else None)
    fmt = args.format or (out.suffix.lstrip(".") if out and out.suffix in (".csv", ".json") else "csv")
    if out is None:
        out = Path(f"sweep.{fmt}")
    try:
        res = run_sweep(cfg, workers=max(1, args.workers))
        (export_json if fmt == "json" else export_csv)(res, out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except NirgasError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    flagged = res.flagged
    print(f"wrote {len(res.rows)} rows to {out}" + (f" ({len(flagged)} flagged)" if flagged else ""))
    return EXIT_FLAGGED if flagged else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
