"""
Command-line front end.

Usage:
    python cli.py check models/ttp.json
    python cli.py dissipation models/trafe1.json --sweep
    python cli.py passify models/dumi1.json --method partfrac --m 5
    python cli.py passify models/ttp.json --method iterate --steps 2 --reduce 1e-9
    python cli.py freqresp models/trafe1.json --wmin 1e-2 --wmax 1e3 --points 400 --out output/trafe1.csv
    python cli.py compare models/dumi1.json output/dumi1_minimax4.json
    python cli.py dump-approximant --family minimax --a 0.5 --b 2
    python cli.py models

Exit status:
    0  passive model / certified passivation / command succeeded
    1  non-passive model / passivation with certificate violations
    2  any error (unreadable model, numerical failure, bad arguments)

Human-readable progress goes to standard output, log records to standard
error (-v for INFO, -vv for DEBUG). PASSIFY_GRID_POINTS overrides the
default verification grid density.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from dissipation import DissipationReport, classify, sweep_max_eigenvalue, sweep_min_eigenvalue
from exporter import export_table, relative_error_table, sweep_table
from model_io import (
    LoadedModel,
    ModelFileError,
    list_models,
    make_output_path,
    read_model,
    to_jsonable,
    write_model,
    write_report,
)
from passify import METHODS, PassivationResult, reduce_result, run_method
from ramp import bilinear_params, default_table, minimax_transformed, zeta_partial_fractions
from settings import MODELS_DIR, SETTINGS, SettingsError
from ss import FrequencyGrid

logger = logging.getLogger("passify")

EXIT_OK = 0
EXIT_NOT_PASSIVE = 1
EXIT_ERROR = 2


def _print_settings(stage: str, rows: Sequence[tuple]) -> None:
    width = max(len(label) for label, _ in rows)
    print(f"[{stage}] Settings:")
    for label, value in rows:
        print(f"  {label.ljust(width)} : {value}")
    print()


def _grid_from_args(args: argparse.Namespace) -> FrequencyGrid:
    wmin = SETTINGS.grid_wmin if args.wmin is None else args.wmin
    wmax = SETTINGS.grid_wmax if args.wmax is None else args.wmax
    points = SETTINGS.grid_points if args.points is None else args.points
    if args.linear:
        return FrequencyGrid.linear(wmin, wmax, points)
    return FrequencyGrid.log(wmin, wmax, points)


def _load(path: str) -> LoadedModel:
    model = read_model(path)
    logger.info("loaded %s (%s): n=%d, p=%d", model.name, model.kind,
                model.realization.n, model.realization.p)
    return model


def _report_lines(stage: str, model: LoadedModel, report: DissipationReport) -> None:
    print(f"[{stage}] model          : {model.name}")
    print(f"[{stage}] states / ports : {model.realization.n} / {model.realization.p}")
    print(f"[{stage}] delta_minus    : {report.delta_minus:.12g}")
    print(f"[{stage}] delta_plus     : {report.delta_plus:.12g}")
    print(f"[{stage}] classification : {report.label}")


# Verbs

def cmd_check(args: argparse.Namespace) -> int:
    model = _load(args.model)
    report = classify(model.realization, args.tol)
    _report_lines("check", model, report)
    return EXIT_OK if report.is_passive else EXIT_NOT_PASSIVE


def cmd_dissipation(args: argparse.Namespace) -> int:
    model = _load(args.model)
    report = classify(model.realization, args.tol)
    out = {"model": model.name, "report": report.as_dict()}
    if args.sweep:
        lower = sweep_min_eigenvalue(model.realization)
        upper = sweep_max_eigenvalue(model.realization)
        out["sweep"] = {"delta_minus": lower.value, "omega_minus": lower.omega,
                        "delta_plus": upper.value, "omega_plus": upper.omega,
                        "points": lower.points}
    print(json.dumps(to_jsonable(out), indent=2))
    return EXIT_OK


def _write_passify_outputs(args: argparse.Namespace, model: LoadedModel,
                           result: PassivationResult) -> None:
    suffix = result.method.replace("(", "").replace(")", "")
    out_path = Path(args.out) if args.out else make_output_path(args.model, f"{suffix}.json")
    report_path = (Path(args.report) if args.report
                   else out_path.with_name(f"{out_path.stem}_report.json"))
    write_model(out_path, result.G, name=f"{model.name}_{suffix}",
                source=f"{result.method} passivation of {model.name}")
    summary = result.summary()
    summary["model"] = model.name
    write_report(report_path, summary)
    print(f"[passify] model written  : {out_path}")
    print(f"[passify] report written : {report_path}")


def cmd_passify(args: argparse.Namespace) -> int:
    model = _load(args.model)
    H = model.realization

    _print_settings("passify", [
        ("MODEL", f"{args.model} ({model.name}, n={H.n}, p={H.p})"),
        ("METHOD", args.method),
        ("STEPS", args.steps if args.method == "iterate" else "-"),
        ("M", args.m if args.method == "partfrac" else "-"),
        ("REDUCE", args.reduce if args.reduce is not None else "off"),
        ("GRID_POINTS", SETTINGS.grid_points),
    ])

    report = classify(H, args.tol)
    _report_lines("passify", model, report)

    result = run_method(H, args.method, steps=args.steps, m=args.m, report=report)
    if args.reduce is not None:
        result = reduce_result(H, result, args.reduce)

    print(f"[passify] nu             : {result.nu:.12g}")
    print(f"[passify] alpha          : {result.alpha:.12g}")
    print(f"[passify] states         : {result.states} (assembled {result.assembled_states}, "
          f"estimate {result.pole_estimate})")
    if result.reduced_states is not None:
        print(f"[passify] reduced states : {result.reduced_states}")
    print(f"[passify] delta_minus(G) : {result.achieved_delta_minus}")
    print(f"[passify] sweep error    : {result.sweep_error}")
    for message in result.violations:
        print(f"[passify] VIOLATION      : {message}")

    _write_passify_outputs(args, model, result)
    return EXIT_OK if result.certified else EXIT_NOT_PASSIVE


def cmd_freqresp(args: argparse.Namespace) -> int:
    model = _load(args.model)
    frame, skipped = sweep_table(model.realization, _grid_from_args(args))
    comments = [f"skipped omega={w:.15g} (pole on the imaginary axis)" for w in skipped]
    target = args.out if args.out else sys.stdout
    written = export_table(frame, target, comments)
    if written:
        print(f"[freqresp] {len(frame)} row(s) written to {written}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    first = _load(args.model1)
    second = _load(args.model2)
    frame = relative_error_table(second.realization, first.realization, _grid_from_args(args))
    target = args.out if args.out else sys.stdout
    written = export_table(frame, target)
    if written:
        print(f"[compare] max relative error {frame['relerr'].max():.6e}, written to {written}")
    return EXIT_OK


def cmd_dump_approximant(args: argparse.Namespace) -> int:
    if args.family == "zeta":
        f = zeta_partial_fractions(args.m)
        if args.nu is not None:
            f = f.scaled(args.nu)
    else:
        f = minimax_transformed(args.a, args.b, default_table())
    doc = f.as_dict()
    if args.family == "minimax":
        tau, kappa = bilinear_params(args.a, args.b)
        doc["tau"], doc["kappa"] = tau, kappa
    print(json.dumps(to_jsonable(doc), indent=2))
    return EXIT_OK


def cmd_models(args: argparse.Namespace) -> int:
    paths = list_models(args.dir)
    if not paths:
        print(f"[models] no model files in {args.dir}")
        return EXIT_ERROR
    broken = 0
    for path in paths:
        try:
            model = read_model(path)
        except ModelFileError as exc:
            broken += 1
            logger.warning("skipping %s: %s", path.name, exc)
            continue
        R = model.realization
        print(f"[models] {model.name:<12} {model.kind:<4} n={R.n:<3} p={R.p}  {path}")
    return EXIT_ERROR if broken else EXIT_OK


# Parser

def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--wmin", type=float, default=None, help="lowest angular frequency (rad/s)")
    p.add_argument("--wmax", type=float, default=None, help="highest angular frequency (rad/s)")
    p.add_argument("--points", type=int, default=None, help="number of frequencies")
    spacing = p.add_mutually_exclusive_group()
    spacing.add_argument("--log", dest="linear", action="store_false", help="log spacing (default)")
    spacing.add_argument("--linear", dest="linear", action="store_true", help="linear spacing")
    p.set_defaults(linear=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="passify", description="Global passivation of LTI state-space models.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="classify a model as passive / non-passive")
    p.add_argument("model")
    p.add_argument("--tol", type=float, default=None, help="dissipation tolerance")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dissipation", help="full dissipation report as JSON")
    p.add_argument("model")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--sweep", action="store_true", help="add dense-sweep oracle values")
    p.set_defaults(func=cmd_dissipation)

    p = sub.add_parser("passify", help="produce a passive model")
    p.add_argument("model")
    p.add_argument("--method", choices=METHODS, default="minimax")
    p.add_argument("--steps", type=int, default=2, help="doubling steps for --method iterate")
    p.add_argument("--m", type=int, default=5, help="zeta_2m order for --method partfrac")
    p.add_argument("--tol", type=float, default=None, help="dissipation tolerance")
    p.add_argument("--reduce", type=float, default=None, metavar="R",
                   help="balanced truncation with relative Hankel cut-off R")
    p.add_argument("--out", default=None, help="output model file")
    p.add_argument("--report", default=None, help="output report file")
    p.set_defaults(func=cmd_passify)

    p = sub.add_parser("freqresp", help="frequency response and lambda_min as CSV")
    p.add_argument("model")
    _add_grid_flags(p)
    p.add_argument("--out", default=None, help="CSV or .xlsx file (default: stdout)")
    p.set_defaults(func=cmd_freqresp)

    p = sub.add_parser("compare", help="relative error of model2 against model1 as CSV")
    p.add_argument("model1")
    p.add_argument("model2")
    _add_grid_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dump-approximant", help="print a ramp approximant as JSON")
    p.add_argument("--family", choices=("zeta", "minimax"), default="zeta")
    p.add_argument("--m", type=int, default=5, help="zeta_2m order")
    p.add_argument("--nu", type=float, default=None, help="scale the zeta approximant to [-nu, inf)")
    p.add_argument("--a", type=float, default=1.0, help="minimax interval [-a, b]")
    p.add_argument("--b", type=float, default=1.0)
    p.set_defaults(func=cmd_dump_approximant)

    p = sub.add_parser("models", help="list the model files in a directory")
    p.add_argument("--dir", default=str(MODELS_DIR), help="directory to scan (default: bundled models)")
    p.set_defaults(func=cmd_models)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (ModelFileError, SettingsError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
