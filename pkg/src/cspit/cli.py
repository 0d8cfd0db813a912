"""Command-line entry point: ``analyze``, ``simulate``, ``sweep``, ``validate``.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 some cells failed.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import experiments as ex

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_PARTIAL = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cspit", description="CS+PIT characteristic-time analysis")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", required=True, help="output CSV path")
        sp.add_argument("--parallel", type=int, default=None,
                        help=f"worker processes (default ${ex.PARALLEL_ENV} or 1)")
        sp.add_argument("--curves", default=None, help="directory for two-column curve files")
        sp.add_argument("--no-timing", action="store_true",
                        help="leave wall_time_s empty for reproducible output")

    a = sub.add_parser("analyze", help="solve a configured scenario analytically")
    a.add_argument("--config", required=True)
    common(a)

    s = sub.add_parser("simulate", help="simulate a configured scenario at desk scale")
    s.add_argument("--config", required=True)
    s.add_argument("--requests", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    common(s)

    w = sub.add_parser("sweep", help="run a figure preset")
    w.add_argument("--preset", required=True, choices=sorted(ex.PRESETS))
    w.add_argument("--mode", choices=ex.MODES, default="analysis")
    w.add_argument("--capacity-units", choices=("fraction", "absolute"), default=None,
                   help="reading of fig8 capacity values")
    common(w)

    v = sub.add_parser("validate", help="check a config file without running it")
    v.add_argument("--config", required=True)
    return p


def _scenario(args) -> ex.Scenario:
    if args.command == "sweep":
        over = {"mode": args.mode}
        if args.capacity_units:
            over["capacity_units"] = args.capacity_units
        return ex.preset(args.preset, **over)
    s = ex.load_config(args.config)
    if args.command == "analyze":
        return replace(s, mode="analysis")
    if args.command == "simulate":
        sim = s.simulation
        if args.requests is not None:
            sim = replace(sim, requests=args.requests)
        if args.seed is not None:
            sim = replace(sim, seed=args.seed)
        return ex._validate(replace(s, mode="simulation", simulation=sim))
    return s


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        s = _scenario(args)
    except ex.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.command == "validate":
        print(f"{args.config}: ok ({s.name})")
        return EXIT_OK
    try:
        rows = ex.run_scenario(s, args.parallel)
        ex.emit_csv(rows, args.out, timing=not args.no_timing)
        if args.curves:
            ex.emit_curves(rows, args.curves)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    failed = [r for r in rows if r.failed]
    for r in failed:
        print(f"cell failed: {r.policy} {r.traffic} {r.param_name}={r.param_value}: {r.error}",
              file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
