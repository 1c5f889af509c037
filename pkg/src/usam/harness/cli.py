"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..model import DEFAULT_PRESET, PRESETS, ConfigError, load_config, load_preset
from .analysis import CSV_COLUMNS, analyze
from .experiments import SweepSpec, parse_grid, phase, rows_to_csv, sweep, write_file
from .validation import validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _add_common(p):
    p.add_argument("--config", type=Path, help="TOML config file (overrides --preset)")
    p.add_argument("--preset", choices=PRESETS, default=None,
                   help=f"bundled traffic mix (default {DEFAULT_PRESET})")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def _add_sim(p):
    p.add_argument("--mode", choices=("sim", "asym"), default="asym")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--horizon-s", type=float, default=None,
                   help="simulated horizon per replication in seconds")
    p.add_argument("--warmup-frac", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="usam", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="evaluate one (rho, delta) point")
    _add_common(p)
    _add_sim(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("sweep", help="sweep delta or rho and write CSV + SVG")
    _add_common(p)
    _add_sim(p)
    p.add_argument("--var", choices=("delta", "rho"), required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--fixed", type=float, default=None,
                   help="value of the non-swept variable (default rho=0.1 or delta=0.3)")
    p.add_argument("--no-svg", action="store_true")

    p = sub.add_parser("phase", help="label the (delta, rho) plane")
    _add_common(p)
    p.add_argument("--delta-grid", default="0.01:1:30")
    p.add_argument("--rho-grid", default="0:1:30")

    p = sub.add_parser("validate", help="run the self-check suite")
    _add_common(p)
    p.add_argument("--only", nargs="*", default=None, help="subset of check keys")
    return parser


def _config(args):
    if args.config is not None:
        return load_config(args.config)
    return load_preset(args.preset or DEFAULT_PRESET)


def _cmd_analyze(cfg, args):
    horizon = args.horizon_s * 1000.0 if args.horizon_s else None
    ev = analyze(cfg, args.rho, args.delta, args.mode, reps=args.reps, horizon_ms=horizon,
                 warmup_frac=args.warmup_frac, seed=args.seed, workers=args.workers)
    text = rows_to_csv([ev.row()], CSV_COLUMNS)
    th = ev.thresholds
    sys.stdout.write(text)
    print(f"# delta_queue={th.delta_queue:.6f} delta_wcrt={th.delta_wcrt:.6f} "
          f"delta_safe={th.delta_safe:.6f} rho_safe({args.delta:g})={th.rho_safe_at(args.delta):.6f}")
    if args.out is not None:
        write_file(args.out / "analyze.csv", text)
    return EXIT_OK


def _cmd_sweep(cfg, args):
    spec = SweepSpec(args.var, args.start, args.stop, args.steps, args.fixed, args.mode,
                     args.reps, args.horizon_s * 1000.0 if args.horizon_s else None,
                     args.seed, args.warmup_frac)
    text, _, paths = sweep(cfg, spec, args.out or Path("."), workers=args.workers,
                           plot=not args.no_svg)
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_phase(cfg, args):
    _, _, paths = phase(cfg, parse_grid(args.delta_grid), parse_grid(args.rho_grid),
                        args.out or Path("."))
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_validate(cfg, args):
    results = validate(cfg, only=set(args.only) if args.only else None)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {"analyze": _cmd_analyze, "sweep": _cmd_sweep, "phase": _cmd_phase,
            "validate": _cmd_validate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, args)
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
