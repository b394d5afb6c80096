"""Command-line front end: run suites, list scenarios, threshold sweep.

Exit codes: 0 all checks pass (or fail exactly as the scenario
predicts), 1 check failure, 2 config or I/O error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys

from . import geometry as geo
from . import measure as me
from .config import parse_config
from .errors import ConfigError
from .report import plot_csv, to_csv, to_table
from .scenarios import BUILTINS, SUITES, builtin
from .suites import run_suites


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warplab",
        description="verification suites for radial diffusions on "
                    "rotationally symmetric model spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run verification suites")
    run_p.add_argument("--config", required=True,
                       help="config file path, or a built-in scenario name")
    run_p.add_argument("--suite", default="all",
                       choices=SUITES + ("all",),
                       help="suite to run (default: all configured)")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    run_p.add_argument("--out", default=None, metavar="DIR",
                       help="directory for report/provenance/plot CSVs")
    run_p.add_argument("--format", dest="fmt", default="table",
                       choices=("table", "csv"),
                       help="stdout rendering (default: table)")

    sub.add_parser("list-scenarios", help="list built-in scenarios")

    sweep_p = sub.add_parser(
        "sweep",
        help="sweep the well depth against the curvature scale and "
             "collect exponential-moment evidence near the threshold")
    sweep_p.add_argument("--ratios",
                         default="0.8,0.9,1.0,1.1,1.25,1.5,2.0,2.5",
                         help="comma-separated depth/scale ratios")
    sweep_p.add_argument("--out", default=None, metavar="DIR",
                         help="directory for the sweep CSV")
    sweep_p.add_argument("--format", dest="fmt", default="table",
                         choices=("table", "csv"))
    return parser


def _load_scenario(spec: str):
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    if spec in BUILTINS:
        return builtin(spec)
    raise ConfigError(f"config {spec!r}: no such file or built-in scenario "
                      f"(built-ins: {', '.join(sorted(BUILTINS))})")


def _write_outputs(out_dir: str, bundle, csv_text: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, bundle.scenario)
    with open(f"{base}_report.csv", "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    with open(f"{base}_provenance.txt", "w", encoding="utf-8") as fh:
        fh.write("".join(line + "\n" for line in bundle.provenance))
    for key, (header, rows) in sorted(bundle.plots.items()):
        with open(f"{base}_{key}.csv", "w", encoding="utf-8") as fh:
            fh.write(plot_csv(header, rows))


def _cmd_run(args) -> int:
    scenario = _load_scenario(args.config)
    suites = None if args.suite == "all" else (args.suite,)
    bundle = run_suites(scenario, suites=suites, seed=args.seed)
    csv_text = to_csv(bundle.reports)
    if args.out is not None:
        _write_outputs(args.out, bundle, csv_text)
    if args.fmt == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(to_table(bundle.reports, bundle.expect_fail))
        if bundle.provenance:
            sys.stdout.write("provenance:\n")
            sys.stdout.write("".join(f"  {line}\n"
                                     for line in bundle.provenance))
    return bundle.exit_status


def _cmd_list() -> int:
    for name in sorted(BUILTINS):
        s = builtin(name)
        marks = f" expect_fail={len(s.expect_fail)}" if s.expect_fail else ""
        sys.stdout.write(
            f"{name}: manifold={s.manifold}{s.manifold_params} "
            f"potential={s.potential}{s.potential_params}{marks}\n")
    return 0


# sweep geometry: the heavy-tail surface family with the well depth
# delta = ratio x (curvature scale sigma sqrt(d-1)); evidence only, the
# exact crossover constant is an open question
_SWEEP_SIGMA = 2.0
_SWEEP_C = 6.0
_SWEEP_DIM = 2
_SWEEP_LAM = 1.0


def _sweep_rows(ratios):
    sdm = _SWEEP_SIGMA * math.sqrt(_SWEEP_DIM - 1.0)
    m = geo.gauss_warp(1.0, _SWEEP_DIM)
    rows = []
    for ratio in ratios:
        delta = ratio * sdm
        v = geo.quad_sqrt_well(delta / 2.0, _SWEEP_LAM)
        gap = delta - sdm
        lam = 0.45 * gap if gap > 0.0 else 0.25
        mass = me.partition_mass(m, v)
        finite = mass.converged and not mass.divergent
        if finite:
            mom = me.exp_moment(m, v, lam)
            moment = mom.value
            evidence = "yes" if gap > 0.0 and mom.converged else "no"
        else:
            moment = math.inf
            evidence = "no"
        rows.append((ratio, delta, gap, lam,
                     mass.radial_mass if finite else math.inf,
                     moment, evidence))
    return rows


_SWEEP_HEADER = ("ratio", "delta", "gap", "lambda_probe", "mass", "moment",
                 "hyper_evidence")


def _sweep_csv(rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(_SWEEP_HEADER)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (int, float)) else x
                    for x in row])
    return out.getvalue()


def _cmd_sweep(args) -> int:
    try:
        ratios = tuple(float(tok) for tok in args.ratios.split(",") if tok)
    except ValueError:
        raise ConfigError(f"--ratios must be comma-separated numbers; "
                          f"got {args.ratios!r}")
    if not ratios or any(r <= 0.0 for r in ratios):
        raise ConfigError("--ratios must be positive and nonempty")
    rows = _sweep_rows(ratios)
    text = _sweep_csv(rows)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "sweep.csv"), "w",
                  encoding="utf-8") as fh:
            fh.write(text)
    if args.fmt == "csv":
        sys.stdout.write(text)
    else:
        sys.stdout.write("  ".join(_SWEEP_HEADER) + "\n")
        for row in rows:
            cells = [f"{x:.6g}" if isinstance(x, (int, float)) else x
                     for x in row]
            sys.stdout.write("  ".join(cells) + "\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-scenarios":
            return _cmd_list()
        return _cmd_sweep(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
