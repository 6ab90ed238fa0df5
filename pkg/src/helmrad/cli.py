"""Command line entry point: helmrad solve | sweep-modes | build-sk."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import harness
from .errors import HelmradError


def _m_arg(text):
    if text == "auto":
        return 0
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("m must be a positive integer or 'auto'")
    return value


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def _print_rows(rows, columns):
    print(" ".join(f"{c:>14}" for c in columns))
    for row in rows:
        print(" ".join(f"{_fmt(row[c]):>14}" for c in columns))


def build_parser():
    p = argparse.ArgumentParser(prog="helmrad", description=__doc__)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default $HELMRAD_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one scattering problem and write fields + report")
    s.add_argument("--potential", default="gaussian", help="gaussian, volcano, discont, square-shell, rsq, zero or custom")
    s.add_argument("--potential-file", default=None, help="JSON piecewise-polynomial potential (with --potential custom)")
    s.add_argument("--R", type=float, default=None, help="override the support radius")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--m", type=_m_arg, default=None, help="truncation order or 'auto' (adaptive)")
    s.add_argument("--incident", default="plane:0.7853981633974483", help="plane:<theta> or circular:<x>,<y>")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--grid", type=int, default=64, help="points per axis of the field images")
    s.add_argument("--out", default="results", help="output directory")
    s.add_argument("--oracle", dest="oracle", action="store_true", default=None, help="force the oracle comparison")
    s.add_argument("--no-oracle", dest="oracle", action="store_false")
    s.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    s.add_argument("--allow-large-k", action="store_true", help="permit k above 4096")

    w = sub.add_parser("sweep-modes", help="per-mode timing and error series")
    w.add_argument("--potential", default="rsq")
    w.add_argument("--k", type=float, default=256.0, help="fixed k, or the largest k of a k sweep")
    w.add_argument("--kmin", type=float, default=256.0)
    w.add_argument("--regime", choices=harness.REGIMES, default="n-eq-k")
    w.add_argument("--steps", type=int, default=9, help="number of n values in the fixed-k regime")
    w.add_argument("--repeats", type=int, default=1, help="interleaved timing rounds; the lower quartile is reported")
    w.add_argument("--tol", type=float, default=1e-12)
    w.add_argument("--no-check", action="store_true", help="skip the error column")
    w.add_argument("--csv", default=None, help="output CSV path")
    w.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    w.add_argument("--allow-large-k", action="store_true", help="permit k above 4096")

    b = sub.add_parser("build-sk", help="time construction of psi_0..psi_k for doubling k")
    b.add_argument("--potential", default="square-shell")
    b.add_argument("--kmin", type=float, default=256.0)
    b.add_argument("--kmax", type=float, default=4096.0)
    b.add_argument("--tol", type=float, default=1e-12)
    b.add_argument("--no-check", action="store_true", help="skip the error column")
    b.add_argument("--csv", default=None, help="output CSV path")
    b.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    b.add_argument("--allow-large-k", action="store_true", help="permit k above 4096")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = harness.ExperimentConfig(
                potential=args.potential,
                k=args.k,
                m=args.m,
                incident=args.incident,
                grid=args.grid,
                output_dir=args.out,
                tol=args.tol,
                threads=args.threads,
                potential_file=args.potential_file,
                R=args.R,
                oracle=args.oracle,
                allow_large_k=args.allow_large_k,
            )
            report = harness.run_experiment(cfg)
            print(report.to_json())
            print(f"wrote {Path(args.out) / 'report.json'}", file=sys.stderr)
        elif args.command == "sweep-modes":
            rows = harness.sweep_modes(
                args.potential,
                args.k,
                args.regime,
                kmin=args.kmin,
                steps=args.steps,
                tol=args.tol,
                repeats=args.repeats,
                check=not args.no_check,
                allow_large_k=args.allow_large_k,
            )
            _print_rows(rows, harness.SERIES_COLUMNS)
            if args.csv:
                harness.write_series(args.csv, rows, harness.SERIES_COLUMNS)
        else:
            rows = harness.build_sk(
                args.potential,
                args.kmin,
                args.kmax,
                args.tol,
                args.threads,
                check=not args.no_check,
                allow_large_k=args.allow_large_k,
            )
            _print_rows(rows, harness.SK_COLUMNS)
            if args.csv:
                harness.write_series(args.csv, rows, harness.SK_COLUMNS)
    except (HelmradError, RuntimeError, ValueError, OSError) as exc:
        print(f"helmrad: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
