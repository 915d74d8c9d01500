"""End-to-end analyses composing the solver, selection, shrinkage, and bootstrap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import (
    EstimatorSpec,
    EvalReport,
    bootstrap_evaluate,
    cv_fraction_curve,
    kfold_split,
    one_se_rule,
)
from .lasso import LassoConfig, LassoFit, LassoPath, compute_path, fit_lasso, lambda_grid
from .model import Dataset, standardize
from .shrinkage import ShrinkageVariant, ShrunkenFit, SteinInputs, shrink, stein_inputs


@dataclass(frozen=True)
class FractionSelection:
    """A LASSO path with its CV curve and the one-SE choice of standardized bound."""

    path: LassoPath
    pe_mean: np.ndarray
    pe_se: np.ndarray
    selected_s: float
    selected_lambda: float


def select_fraction(
    d: Dataset,
    seed: int,
    folds: int = 10,
    scale_columns: bool = True,
    grid_count: int = 100,
    grid_ratio: float = 1e-3,
    tol: float = 1e-7,
    max_sweeps: int = 10_000,
) -> FractionSelection:
    """Compute the full-data path and pick the standardized bound by the one-SE rule."""
    sd = standardize(d, scale_columns=scale_columns)
    grid = lambda_grid(sd, grid_count, grid_ratio)
    path = compute_path(sd, grid, LassoConfig(0.0, tol, max_sweeps))
    plan = kfold_split(d.n, folds, seed)
    pe_mean, pe_se = cv_fraction_curve(
        d, path.s, plan, scale_columns, grid_count, grid_ratio, tol, max_sweeps
    )
    s_hat = one_se_rule(path, pe_mean, pe_se)
    return FractionSelection(
        path=path,
        pe_mean=pe_mean,
        pe_se=pe_se,
        selected_s=s_hat,
        selected_lambda=path.lambda_at(s_hat),
    )


@dataclass(frozen=True)
class ShrinkageTable:
    """Everything behind a coefficient table: base fit, inputs, per-variant results."""

    fit: LassoFit
    inputs: SteinInputs
    shrunken: dict[str, ShrunkenFit]
    intercept: float
    feature_names: tuple[str, ...]

    def column(self, name: str, shrink_intercept: bool = False) -> tuple[float, np.ndarray]:
        """(intercept, standardized slopes) for one estimator column."""
        if name == "lasso":
            return self.intercept, np.asarray(self.fit.slopes)
        sh = self.shrunken[name]
        icept = self.intercept * sh.factor if shrink_intercept else self.intercept
        return icept, np.asarray(sh.slopes)


def shrinkage_table(
    d: Dataset,
    lam: float,
    variants: tuple[ShrinkageVariant, ...],
    scale_columns: bool = True,
    tol: float = 1e-7,
    max_sweeps: int = 10_000,
    warm_start: np.ndarray | None = None,
) -> ShrinkageTable:
    """Fit at one penalty and apply every requested shrinkage variant."""
    sd = standardize(d, scale_columns=scale_columns)
    fit = fit_lasso(sd, LassoConfig(lam, tol, max_sweeps), warm_start)
    inputs = stein_inputs(fit, sd)
    shrunken = {v.value: shrink(fit, v, inputs) for v in variants}
    return ShrinkageTable(
        fit=fit,
        inputs=inputs,
        shrunken=shrunken,
        intercept=sd.y_mean,
        feature_names=d.feature_names,
    )


@dataclass(frozen=True)
class ProstateAnalysis:
    """The full study of one dataset: selection, coefficient table, bootstrap report."""

    selection: FractionSelection
    table: ShrinkageTable
    report: EvalReport | None


def run_prostate_analysis(
    d: Dataset,
    variants: tuple[ShrinkageVariant, ...],
    bootstrap_replicates: int,
    seed: int,
    folds: int = 10,
    grid_count: int = 100,
    grid_ratio: float = 1e-3,
    shrink_intercept: bool = False,
    reselect_fraction: bool = False,
    workers: int = 1,
    tol: float = 1e-7,
    max_sweeps: int = 10_000,
) -> ProstateAnalysis:
    """Path + one-SE selection + shrinkage table + optional bootstrap evaluation."""
    selection = select_fraction(
        d, seed, folds=folds, grid_count=grid_count, grid_ratio=grid_ratio,
        tol=tol, max_sweeps=max_sweeps,
    )
    warm_idx = selection.path.nearest_index(selection.selected_lambda)
    table = shrinkage_table(
        d, selection.selected_lambda, variants,
        tol=tol, max_sweeps=max_sweeps,
        warm_start=selection.path.fits[warm_idx].slopes,
    )
    report = None
    if bootstrap_replicates > 0:
        common = dict(
            mode="fraction", value=selection.selected_s,
            shrink_intercept=shrink_intercept,
            grid_count=grid_count, grid_ratio=grid_ratio,
            tol=tol, max_sweeps=max_sweeps,
        )
        specs = [EstimatorSpec(variant=None, **common)]
        specs += [EstimatorSpec(variant=v, **common) for v in variants]
        report = bootstrap_evaluate(
            d, specs, bootstrap_replicates, seed,
            plan_folds=folds, reselect_fraction=reselect_fraction, workers=workers,
        )
    return ProstateAnalysis(selection=selection, table=table, report=report)
