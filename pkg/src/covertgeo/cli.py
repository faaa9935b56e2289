"""``covertgeo`` command line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, read_raw
from .harness import (
    COMMANDS,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY,
    FIGURES,
    ExperimentSpec,
    gnuplot_stub,
    parse_sweep,
    run_experiment,
    run_figure,
    run_verify,
)
from .numerics import NumericalError
from .verify import TARGETS

log = logging.getLogger("covertgeo")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; our contract reserves 2 for numerical failures
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="covertgeo",
                description="Covertness, reliability and covert throughput in a Poisson interferer field.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with flat keys; missing keys take the defaults")
    p.add_argument("--sweep", help="key=v1,v2,... evaluated row by row (figure: overrides the x grid)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--threads", type=int, help="Monte Carlo worker threads (capped by COVERTGEO_THREADS)")
    p.add_argument("--backend", choices=("auto", "ppp", "levy"), help="interference sampler")
    p.add_argument("--fig", type=int, choices=sorted(FIGURES), help="figure number for 'figure'")
    p.add_argument("--target", choices=TARGETS, help="check to run for 'verify'")
    p.add_argument("--gnuplot", help="also write a gnuplot script stub for 'figure'")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"covertgeo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = read_raw(args.config)
        for key in ("seed", "trials", "threads", "backend"):
            if getattr(args, key) is not None:
                raw[key] = getattr(args, key)
        sweep = parse_sweep(args.sweep) if args.sweep else None

        if args.command == "verify":
            if args.target is None:
                raise UsageError("verify needs --target")
            report = run_verify(args.target, raw)
            _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
            for a in report["assertions"]:
                status = "PASS" if a["passed"] else "FAIL"
                print(f"{status} {args.target}: {a['name']} (dev {a['deviation']}, tol {a['tolerance']})",
                      file=sys.stderr)
            return EXIT_OK if report["passed"] else EXIT_VERIFY

        if args.command == "figure":
            if args.fig is None:
                raise UsageError("figure needs --fig")
            grid = None
            if sweep is not None:
                if sweep[0] != FIGURES[args.fig].x_key:
                    raise UsageError(f"figure {args.fig} sweeps {FIGURES[args.fig].x_key}, not {sweep[0]}")
                grid = sweep[1]
            table = run_figure(args.fig, raw, grid)
            if args.gnuplot:
                Path(args.gnuplot).write_text(gnuplot_stub(args.fig, args.out or "figure.csv"))
        else:
            table = run_experiment(ExperimentSpec(args.command, raw, sweep))
        _emit(table.to_csv(), args.out)
        return EXIT_NUMERICAL if table.errors else EXIT_OK
    except (UsageError, ConfigError) as exc:
        print(f"covertgeo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ArithmeticError) as exc:
        print(f"covertgeo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
