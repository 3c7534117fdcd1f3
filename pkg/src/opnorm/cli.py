"""``opnorm`` command line.

Subcommands: ``norm``, ``predict``, ``sample``, ``experiment`` and
``check-regularity``.  Any option can also come from a TOML file given with
``--config``; keys are option names (``p``, ``q``, ``input``, ...) either at
the top level or inside a table named after the subcommand.  Flags win.

Exit status: 0 on success, 2 on invalid input, 3 on numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .experiment import PREDICTORS, ExperimentGrid, predictor_for, ratio_summary, run_grid
from .io import MatrixFormatError, format_matrix_csv, format_matrix_json, read_matrix
from .norms import bracket, parse_exponent
from .randmat import DistributionSpec, check_regularity, gaussian, rademacher, sample_matrix

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3


class UsageError(ValueError):
    pass


def _num(x: float) -> str:
    return "inf" if x == math.inf else "%.17g" % x


def parse_dist(text: str | None, default: DistributionSpec | None = None) -> DistributionSpec:
    """Distribution from JSON text, a JSON file, or a shorthand.

    Shorthands: ``gaussian``, ``rademacher``, ``weibull:R`` and ``exponential``.
    """
    if text is None:
        if default is None:
            raise UsageError("a distribution is required (--dist)")
        return default
    if isinstance(text, dict):
        return DistributionSpec.from_dict(text)
    s = text.strip()
    if s.startswith("{"):
        return DistributionSpec.from_json(s)
    if s == "gaussian":
        return gaussian()
    if s == "rademacher":
        return rademacher()
    if s == "exponential":
        return DistributionSpec("weibull", r=1.0)
    if s.startswith("weibull:"):
        return DistributionSpec("weibull", r=float(s.split(":", 1)[1]))
    path = Path(s)
    if path.is_file():
        return DistributionSpec.from_json(path.read_text(encoding="utf-8"))
    raise UsageError(f"cannot read a distribution from {text!r}")


def _load_toml(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


# --------------------------------------------------------------------------
# commands


def cmd_norm(args, out) -> int:
    if not args.input:
        raise UsageError("norm needs a matrix file (--input)")
    p, q = parse_exponent(args.p), parse_exponent(args.q)
    A = read_matrix(args.input, args.matrix_format)
    b = bracket(A, p, q, restarts=args.restarts, seed=args.seed)
    if not (np.isfinite(b.lower) and np.isfinite(b.upper)):
        raise FloatingPointError("norm bracket is not finite")
    if args.format == "json":
        out.write(json.dumps(b.to_dict(), sort_keys=True) + "\n")
    elif b.exact:
        out.write(_num(b.upper) + "\n")
    else:
        out.write(f"{_num(b.lower)} {_num(b.upper)}\n")
    return EXIT_OK


def cmd_predict(args, out) -> int:
    defaults = {"gaussian": gaussian(), "rademacher": rademacher()}
    dist = parse_dist(args.dist, defaults.get(args.formula))
    if args.formula == "weibull" and args.dist is None:
        raise UsageError("the weibull formula needs --dist weibull:R")
    if args.m is None or args.n is None:
        raise UsageError("predict needs --m and --n")
    pv = predictor_for(args.formula, dist, args.m, args.n, parse_exponent(args.p), parse_exponent(args.q))
    if not math.isfinite(pv.value):
        raise FloatingPointError("predictor value is not finite")
    if args.format == "json":
        out.write(pv.to_json() + "\n")
    else:
        out.write("%.17g\n" % pv.value)
    return EXIT_OK


def cmd_sample(args, out) -> int:
    dist = parse_dist(args.dist)
    if args.m is None or args.n is None:
        raise UsageError("sample needs --m and --n")
    if args.m < 1 or args.n < 1:
        raise UsageError("--m and --n must be positive")
    A = sample_matrix(dist, args.m, args.n, args.seed)
    text = format_matrix_json(A) if args.format == "json" else format_matrix_csv(A)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_experiment(args, out) -> int:
    if args.grid:
        spec = _load_toml(args.grid)
    elif args.grid_table:
        spec = args.grid_table
    else:
        raise UsageError("experiment needs a grid file (--grid)")
    try:
        grid = ExperimentGrid.from_dict(spec, master_seed=args.seed)
    except KeyError as exc:
        raise UsageError(f"grid is missing {exc.args[0]!r}") from None

    handle = open(args.output, "w", encoding="utf-8", newline="") if args.output else out
    try:
        if args.format == "json":
            def sink(rec):
                handle.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
                handle.flush()
        else:
            import csv

            from .experiment import CSV_COLUMNS

            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)

            def sink(rec):
                writer.writerow(rec.csv_row())
                handle.flush()

        records = run_grid(grid, args.predictor, workers=args.workers, sink=sink)
    finally:
        if args.output:
            handle.close()
    if args.summary:
        Path(args.summary).write_text(
            json.dumps(ratio_summary(records, args.group_by), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def cmd_check_regularity(args, out) -> int:
    dist = parse_dist(args.dist)
    rep = check_regularity(dist, rho_max=args.rho_max, grid_size=args.grid_size)
    out.write(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(prog="opnorm", description="l_p -> l_q norms of random matrices")
    parser.add_argument("--config", help="TOML file supplying default option values")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    s = sub.add_parser("norm", help="bracket ||A||_{p->q} for a matrix file")
    s.add_argument("input", nargs="?", help="matrix file (.csv or .json)")
    s.add_argument("--input", dest="input_flag", help=argparse.SUPPRESS)
    s.add_argument("--p", default="2", help="domain exponent; 'inf' allowed")
    s.add_argument("--q", default="2", help="target exponent; 'inf' allowed")
    s.add_argument("--matrix-format", choices=("csv", "json"), help="override the extension-based guess")
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(func=cmd_norm)
    subs["norm"] = s

    s = sub.add_parser("predict", help="evaluate a predictor formula")
    s.add_argument("--formula", choices=PREDICTORS, default="master")
    s.add_argument("--dist", help="JSON text/file or gaussian|rademacher|exponential|weibull:R")
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--p", default="2")
    s.add_argument("--q", default="2")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(func=cmd_predict)
    subs["predict"] = s

    s = sub.add_parser("sample", help="draw one seeded random matrix")
    s.add_argument("--dist", default="gaussian")
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", help="write here instead of stdout")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_sample)
    subs["sample"] = s

    s = sub.add_parser("experiment", help="run a Monte Carlo grid")
    s.add_argument("--grid", help="grid TOML (trials, master_seed, sizes, exponents, [[dists]])")
    s.add_argument("--seed", type=int, help="overrides master_seed from the grid file")
    s.add_argument("--predictor", choices=PREDICTORS, default="master")
    s.add_argument("--output", help="CSV (or JSON-lines) destination; stdout if omitted")
    s.add_argument("--format", choices=("csv", "json"), default="csv", help="json means JSON lines")
    s.add_argument("--workers", type=int, help="process count (default OPNORM_THREADS or CPU count)")
    s.add_argument("--summary", help="also write the ratio summary as JSON here")
    s.add_argument("--group-by", choices=("regime", "dist"), default="regime")
    s.set_defaults(func=cmd_experiment, grid_table=None)
    subs["experiment"] = s

    s = sub.add_parser("check-regularity", help="moment and tail doubling constants of a law")
    s.add_argument("--dist", required=False)
    s.add_argument("--rho-max", type=float, default=64.0)
    s.add_argument("--grid-size", type=int, default=40)
    s.set_defaults(func=cmd_check_regularity)
    subs["check-regularity"] = s
    return parser, subs


def _apply_config(path, command, subparser):
    cfg = _load_toml(path)
    values = {k: v for k, v in cfg.items() if not isinstance(v, dict) or k == command}
    values.update(values.pop(command, {}) if isinstance(values.get(command), dict) else {})
    if command == "experiment" and "dists" in cfg:
        values["grid_table"] = {k: cfg[k] for k in ("dists", "sizes", "exponents", "trials", "master_seed") if k in cfg}
    known = {a.dest for a in subparser._actions} | {"grid_table"}
    values = {k.replace("-", "_"): v for k, v in values.items()}
    for k in ("dists", "sizes", "exponents", "trials", "master_seed"):
        values.pop(k, None)
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for k in ("p", "q"):
        if k in values:
            values[k] = str(values[k])
    subparser.set_defaults(**values)


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        if args.config:
            _apply_config(args.config, args.command, subs[args.command])
            args = parser.parse_args(argv)
        if args.command == "norm":
            args.input = args.input or args.input_flag
        return args.func(args, out)
    except MatrixFormatError as exc:
        err.write(f"opnorm: malformed matrix: {exc}\n")
        return EXIT_INVALID
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        err.write(f"opnorm: numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError) as exc:
        err.write(f"opnorm: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
