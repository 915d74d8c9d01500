"""Command-line entry point: fit, simulate, and prostate subcommands.

Each run writes its delimited outputs (and optional SVG figures) into
--out-dir together with a manifest.json recording the resolved configuration,
seed, library version, wall-clock duration, and output file list. Table and
figure outputs are byte-for-byte reproducible for a fixed configuration and
seed under any worker count; only the manifest's duration field varies.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import run_prostate_analysis, shrinkage_table
from .errors import DataError, NumericalError
from .evaluation import coefficient_rows, report_rows
from .figures import plot_bootstrap_coefficients, plot_coefficient_paths, plot_rmse_curves
from .lasso import LassoConfig, compute_path, lambda_grid
from .model import standardize
from .prostate import load_prostate
from .shrinkage import ShrinkageVariant
from .simulation import ALL_ESTIMATORS, TABLE_HEADER, LambdaRule, SimConfig, export_rmse_table, run_simulation
from .tables import write_table

DEFAULT_SEED = 42
_VARIANT_TOKENS = tuple(v.value for v in ShrinkageVariant)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_variants(text: str) -> tuple[ShrinkageVariant, ...]:
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in tokens if t not in _VARIANT_TOKENS]
    if bad:
        raise ValueError(f"unknown variants {bad}; choose from {list(_VARIANT_TOKENS)}")
    return tuple(ShrinkageVariant(t) for t in dict.fromkeys(tokens))


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, subcommand: str, config: dict, seed: int,
                    started: float, outputs: list[Path]) -> Path:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "version": __version__,
        "duration_seconds": round(time.monotonic() - started, 3),
        "outputs": sorted(p.name for p in outputs),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def cmd_fit(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    variants = _parse_variants(args.variants)
    d = load_prostate(args.data)

    if args.s is not None:
        sd = standardize(d, scale_columns=True)
        grid = lambda_grid(sd, args.grid_count, args.grid_ratio)
        path = compute_path(sd, grid, LassoConfig(0.0))
        lam = path.lambda_at(args.s)
        warm = path.fits[path.nearest_index(lam)].slopes
    else:
        lam, warm = args.lam, None

    table = shrinkage_table(d, lam, variants, warm_start=warm)
    names = ["lasso"] + [v.value for v in variants]
    columns = {name: table.column(name, shrink_intercept=args.shrink_intercept)
               for name in names}
    rows = [("coef",) + tuple(columns[n][0] for n in names)]
    for j, feat in enumerate(table.feature_names):
        rows.append((feat,) + tuple(float(columns[n][1][j]) for n in names))
    outputs = [write_table(out / "coefficients.csv", ["term"] + names, rows)]

    diag_rows = [("lasso", 1.0, table.inputs.a, table.inputs.w, table.inputs.sigma2, False, False)]
    for v in variants:
        sh = table.shrunken[v.value]
        diag_rows.append((v.value, sh.factor, table.inputs.a, table.inputs.w,
                          table.inputs.sigma2, sh.degenerate, sh.expanded))
    outputs.append(write_table(
        out / "diagnostics.csv",
        ["estimator", "factor", "a", "w", "sigma2", "degenerate", "expanded"],
        diag_rows,
    ))

    config = {
        "data": str(args.data) if args.data else "packaged",
        "s": args.s, "lam": args.lam,
        "variants": [v.value for v in variants],
        "shrink_intercept": args.shrink_intercept,
        "grid_count": args.grid_count, "grid_ratio": args.grid_ratio,
        "format": args.format, "workers": args.workers,
    }
    outputs.append(_write_manifest(out, "fit", config, args.seed, started, outputs))
    return 0


def cmd_simulate(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    estimators = tuple(t.strip() for t in args.estimators.split(",") if t.strip())
    unknown = [e for e in estimators if e not in ALL_ESTIMATORS]
    if unknown:
        raise ValueError(f"unknown estimators {unknown}; choose from {list(ALL_ESTIMATORS)}")
    rule = (LambdaRule(mode="fixed", value=args.lam) if args.lam is not None
            else LambdaRule(mode="cv-min", folds=args.lambda_folds,
                            grid_count=args.grid_count, grid_ratio=args.grid_ratio))
    cfg = SimConfig(
        n=args.n, p=args.p, alpha=args.alpha, r2_max=args.r2_max,
        grid_points=args.grid_points, replications=args.replications,
        seed=args.seed, estimators=estimators, lambda_rule=rule,
    )
    result = run_simulation(cfg, workers=args.workers)
    outputs = [write_table(out / "rmse.csv", TABLE_HEADER, export_rmse_table(result))]
    if args.format == "table+svg":
        outputs.append(plot_rmse_curves(result.r2_grid, result.estimators,
                                        result.rmse, out / "rmse.svg"))
    config = {
        "n": args.n, "p": args.p, "alpha": args.alpha, "r2_max": args.r2_max,
        "grid_points": args.grid_points, "replications": args.replications,
        "estimators": list(estimators),
        "lambda_rule": {"mode": rule.mode, "value": rule.value, "folds": rule.folds,
                        "grid_count": rule.grid_count, "grid_ratio": rule.grid_ratio},
        "format": args.format, "workers": args.workers,
    }
    outputs.append(_write_manifest(out, "simulate", config, args.seed, started, outputs))
    return 0


def cmd_prostate(args) -> int:
    started = time.monotonic()
    out = _out_dir(args)
    variants = _parse_variants(args.variants)
    d = load_prostate(args.data)
    analysis = run_prostate_analysis(
        d, variants,
        bootstrap_replicates=args.replicates,
        seed=args.seed,
        folds=args.folds,
        grid_count=args.grid_count,
        grid_ratio=args.grid_ratio,
        shrink_intercept=args.shrink_intercept,
        reselect_fraction=args.reselect_fraction,
        workers=args.workers,
    )
    sel, table, report = analysis.selection, analysis.table, analysis.report

    path_rows = []
    coefs = sel.path.coefficients
    for i, s in enumerate(sel.path.s):
        for j, feat in enumerate(sel.path.feature_names):
            path_rows.append((float(s), feat, float(coefs[i, j])))
    outputs = [write_table(out / "paths.csv", ["s", "feature", "coefficient"], path_rows)]

    names = ["lasso"] + [v.value for v in variants]
    columns = {n: table.column(n, shrink_intercept=args.shrink_intercept) for n in names}
    rows = [("coef",) + tuple(columns[n][0] for n in names)]
    for j, feat in enumerate(table.feature_names):
        rows.append((feat,) + tuple(float(columns[n][1][j]) for n in names))
    if report is not None:
        rows.append(("rpe",) + tuple(report.rpe[n] for n in names))
    outputs.append(write_table(out / "coefficients.csv", ["term"] + names, rows))

    summary = {
        "selected_s": sel.selected_s,
        "selected_lambda": sel.selected_lambda,
        "a": table.inputs.a,
        "w": table.inputs.w,
        "sigma2": table.inputs.sigma2,
        "factors": {v.value: table.shrunken[v.value].factor for v in variants},
    }
    if report is not None:
        summary["bootstrap"] = {
            "B": report.B, "skipped": report.skipped,
            "degenerate_fold_events": report.degenerate_fold_events,
        }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    outputs.append(summary_path)

    if report is not None:
        outputs.append(write_table(out / "pe.csv",
                                   ["estimator", "pe_mean", "pe_se", "rpe"],
                                   report_rows(report)))
        outputs.append(write_table(out / "bootstrap_coefficients.csv",
                                   ["replicate", "estimator", "feature", "value"],
                                   coefficient_rows(report)))
    if args.format == "table+svg":
        outputs.append(plot_coefficient_paths(sel.path.s, coefs, sel.path.feature_names,
                                              sel.selected_s, out / "paths.svg"))
        if report is not None:
            outputs.append(plot_bootstrap_coefficients(report, out / "bootstrap.svg"))

    config = {
        "data": str(args.data) if args.data else "packaged",
        "replicates": args.replicates, "folds": args.folds,
        "variants": [v.value for v in variants],
        "grid_count": args.grid_count, "grid_ratio": args.grid_ratio,
        "shrink_intercept": args.shrink_intercept,
        "reselect_fraction": args.reselect_fraction,
        "format": args.format, "workers": args.workers,
    }
    outputs.append(_write_manifest(out, "prostate", config, args.seed, started, outputs))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="steinlasso",
                     description="Double-shrinkage regression experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel worker processes (results are identical for any count)")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--format", choices=["table", "table+svg"], default="table",
                        help="emit tables only, or tables plus SVG figures")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    fit = sub.add_parser("fit", parents=[common],
                         help="fit at one penalty or standardized bound and tabulate estimators")
    fit.add_argument("--data", default=None, help="data file (defaults to the packaged copy)")
    group = fit.add_mutually_exclusive_group(required=True)
    group.add_argument("--s", type=float, help="standardized bound in [0, 1]")
    group.add_argument("--lam", type=float, help="penalty value")
    fit.add_argument("--variants", default="prsl,sl2,sl3-sqrt,sl3-log")
    fit.add_argument("--shrink-intercept", action="store_true")
    fit.add_argument("--grid-count", type=int, default=100)
    fit.add_argument("--grid-ratio", type=float, default=1e-3)
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", parents=[common],
                         help="Monte Carlo relative-MSE study over an R^2 grid")
    sim.add_argument("--n", type=int, default=50)
    sim.add_argument("--p", type=int, default=10)
    sim.add_argument("--alpha", type=float, default=0.5)
    sim.add_argument("--r2-max", type=float, default=0.5)
    sim.add_argument("--grid-points", type=int, default=20)
    sim.add_argument("--replications", type=int, default=1000)
    sim.add_argument("--estimators", default=",".join(ALL_ESTIMATORS))
    sim.add_argument("--lam", type=float, default=None,
                     help="fixed penalty (default: per-replication 10-fold CV minimum)")
    sim.add_argument("--lambda-folds", type=int, default=10)
    sim.add_argument("--grid-count", type=int, default=100)
    sim.add_argument("--grid-ratio", type=float, default=1e-3)
    sim.set_defaults(func=cmd_simulate)

    pro = sub.add_parser("prostate", parents=[common],
                         help="path, one-SE selection, shrinkage table, bootstrap errors")
    pro.add_argument("--data", default=None, help="data file (defaults to the packaged copy)")
    pro.add_argument("-B", "--replicates", type=int, default=1000,
                     help="bootstrap replicates (0 disables the bootstrap)")
    pro.add_argument("--folds", type=int, default=10)
    pro.add_argument("--variants", default="prsl,sl2,sl3-sqrt,sl3-log")
    pro.add_argument("--grid-count", type=int, default=100)
    pro.add_argument("--grid-ratio", type=float, default=1e-3)
    pro.add_argument("--shrink-intercept", action="store_true")
    pro.add_argument("--reselect-fraction", action="store_true",
                     help="re-select the standardized bound inside every bootstrap replicate")
    pro.set_defaults(func=cmd_prostate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"steinlasso: data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"steinlasso: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"steinlasso: invalid configuration: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
