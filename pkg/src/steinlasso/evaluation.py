"""Cross-validation, one-standard-error selection, and case-resampled bootstrap.

An estimator here is a small pipeline: standardize on the training rows only,
fit the L1 path at a given penalty or standardized bound, then optionally apply
one of the multiplicative shrinkage variants. Prediction error is squared
error on held-out rows. The bootstrap resamples whole rows with replacement
and reports each estimator's prediction error relative to plain LASSO.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .lasso import LassoConfig, LassoFit, LassoPath, compute_path, fit_lasso, lambda_grid
from .model import CoefficientVector, Dataset, destandardize, predict, standardize, take
from .shrinkage import ShrinkageVariant, ShrunkenFit, shrink, stein_inputs

LASSO = "lasso"


@dataclass(frozen=True)
class FoldPlan:
    """An assignment of each row to one of k folds; sizes differ by at most one."""

    k: int
    assignment: np.ndarray
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        counts = np.bincount(a, minlength=self.k)
        if len(counts) != self.k or counts.min() == 0:
            raise DataError("every fold must receive at least one row")
        if counts.max() - counts.min() > 1:
            raise DataError("fold sizes must differ by at most one")

    @property
    def n(self) -> int:
        return self.assignment.shape[0]


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Uniformly random permutation of n rows cut into k near-equal folds."""
    if k > n:
        raise DataError(f"cannot split {n} rows into {k} folds")
    if k < 2:
        raise DataError(f"need at least 2 folds, got {k}")
    assignment = np.empty(n, dtype=np.int64)
    perm = np.random.default_rng(seed).permutation(n)
    assignment[perm] = np.arange(n) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


@dataclass(frozen=True)
class EstimatorSpec:
    """One pipeline: penalty selection mode, optional shrinkage variant, options.

    mode "fraction" fits at the penalty whose standardized bound equals value;
    "lambda" fits at the penalty value itself; "cv-min" picks the penalty by
    inner k-fold CV on the training rows; "mean" is the constant
    training-mean baseline (no covariates).
    """

    variant: ShrinkageVariant | None = None
    mode: str = "fraction"
    value: float | None = None
    shrink_intercept: bool = False
    scale_columns: bool = True
    grid_count: int = 100
    grid_ratio: float = 1e-3
    folds: int = 10
    cv_seed: int = 0
    tol: float = 1e-7
    max_sweeps: int = 10_000

    def __post_init__(self):
        if self.mode not in ("fraction", "lambda", "cv-min", "mean"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "fraction" and not (self.value is not None and 0 <= self.value <= 1):
            raise ValueError("fraction mode needs a value in [0, 1]")
        if self.mode == "lambda" and not (self.value is not None and self.value >= 0):
            raise ValueError("lambda mode needs a non-negative value")
        if self.mode == "mean" and self.variant is not None:
            raise ValueError("the mean baseline takes no shrinkage variant")

    @property
    def name(self) -> str:
        if self.mode == "mean":
            return "mean"
        return LASSO if self.variant is None else self.variant.value

    def _base_key(self):
        return (self.mode, self.value, self.scale_columns, self.grid_count,
                self.grid_ratio, self.folds, self.cv_seed, self.tol, self.max_sweeps)


@dataclass(frozen=True)
class PipelineFit:
    """A fitted pipeline: original-scale coefficients plus standardized-scale slopes."""

    coef: CoefficientVector
    slopes: np.ndarray
    lam: float | None
    base: LassoFit | None
    shrunken: ShrunkenFit | None
    degenerate: bool


class _BaseFit:
    """Shared part of a pipeline fit (everything before the shrinkage variant)."""

    __slots__ = ("sd", "fit", "lam", "inputs", "stein_unavailable", "base_coef", "mean_only")

    def __init__(self, d: Dataset, spec: EstimatorSpec):
        if spec.mode == "mean":
            self.mean_only = float(d.y.mean())
            self.sd = None
            self.fit = None
            self.lam = None
            self.inputs = None
            self.stein_unavailable = True
            self.base_coef = CoefficientVector(self.mean_only, np.zeros(d.p))
            return
        self.mean_only = None
        sd = standardize(d, scale_columns=spec.scale_columns)
        cfg = LassoConfig(0.0, spec.tol, spec.max_sweeps)
        if spec.mode == "lambda":
            lam = float(spec.value)
            fit = fit_lasso(sd, LassoConfig(lam, spec.tol, spec.max_sweeps))
        elif spec.mode == "fraction":
            grid = lambda_grid(sd, spec.grid_count, spec.grid_ratio)
            path = compute_path(sd, grid, cfg)
            lam = path.lambda_at(float(spec.value))
            warm = path.fits[path.nearest_index(lam)].slopes
            fit = fit_lasso(sd, LassoConfig(lam, spec.tol, spec.max_sweeps), warm)
        else:  # cv-min on the training rows
            grid = lambda_grid(sd, spec.grid_count, spec.grid_ratio)
            plan = kfold_split(d.n, min(spec.folds, d.n), spec.cv_seed)
            sse = np.zeros(grid.shape[0])
            for f in range(plan.k):
                tr = np.flatnonzero(plan.assignment != f)
                te = np.flatnonzero(plan.assignment == f)
                sd_tr = standardize(take(d, tr), scale_columns=spec.scale_columns)
                path_tr = compute_path(sd_tr, grid, cfg)
                Xte = (d.X[te] - sd_tr.column_means) / sd_tr.column_scales
                preds = Xte @ path_tr.coefficients.T + sd_tr.y_mean
                sse += ((d.y[te][:, None] - preds) ** 2).sum(axis=0)
            lam = float(grid[int(np.argmin(sse))])
            fit = fit_lasso(sd, LassoConfig(lam, spec.tol, spec.max_sweeps))
        self.sd = sd
        self.fit = fit
        self.lam = lam
        self.stein_unavailable = not (sd.n > sd.p >= 3)
        self.inputs = None if self.stein_unavailable else stein_inputs(fit, sd)
        self.base_coef = destandardize(fit.slopes, sd)


def _apply_variant(base: _BaseFit, spec: EstimatorSpec) -> PipelineFit:
    if base.mean_only is not None:
        return PipelineFit(coef=base.base_coef, slopes=np.zeros_like(base.base_coef.slopes),
                           lam=None, base=None, shrunken=None, degenerate=False)
    if spec.variant is None:
        return PipelineFit(coef=base.base_coef, slopes=base.fit.slopes, lam=base.lam,
                           base=base.fit, shrunken=None, degenerate=False)
    if base.stein_unavailable:
        # fold too small for the dimension constant: fall back to plain LASSO
        return PipelineFit(coef=base.base_coef, slopes=base.fit.slopes, lam=base.lam,
                           base=base.fit, shrunken=None, degenerate=True)
    shrunken = shrink(base.fit, spec.variant, base.inputs)
    coef = destandardize(shrunken.slopes, base.sd)
    if spec.shrink_intercept:
        coef = CoefficientVector(shrunken.factor * base.base_coef.intercept, coef.slopes)
    return PipelineFit(coef=coef, slopes=shrunken.slopes, lam=base.lam,
                       base=base.fit, shrunken=shrunken, degenerate=False)


def fit_pipeline(d: Dataset, spec: EstimatorSpec) -> PipelineFit:
    """Fit the full pipeline (standardize, penalized fit, optional shrinkage) on d."""
    return _apply_variant(_BaseFit(d, spec), spec)


def _fit_group(d: Dataset, specs: Sequence[EstimatorSpec]) -> dict[str, PipelineFit]:
    """Fit several specs on the same rows, sharing identical base fits."""
    bases: dict[tuple, _BaseFit] = {}
    out = {}
    for spec in specs:
        key = spec._base_key()
        if key not in bases:
            bases[key] = _BaseFit(d, spec)
        out[spec.name] = _apply_variant(bases[key], spec)
    return out


@dataclass(frozen=True)
class CvPredictionError:
    """Pooled held-out squared error, its fold-level spread, and per-fold models."""

    pe_mean: float
    pe_se: float
    fold_pe: np.ndarray
    fold_models: tuple[CoefficientVector, ...]
    degenerate_folds: tuple[int, ...]


def cv_prediction_error(d: Dataset, spec: EstimatorSpec, plan: FoldPlan) -> CvPredictionError:
    """k-fold CV prediction error of one pipeline; training rows never see held-out rows."""
    if plan.n != d.n:
        raise DataError(f"fold plan covers {plan.n} rows but the dataset has {d.n}")
    sse_total = 0.0
    fold_pe = np.empty(plan.k)
    models = []
    degenerate = []
    for f in range(plan.k):
        tr = np.flatnonzero(plan.assignment != f)
        te = np.flatnonzero(plan.assignment == f)
        pf = fit_pipeline(take(d, tr), spec)
        if pf.degenerate:
            degenerate.append(f)
        err = d.y[te] - predict(d.X[te], pf.coef)
        sse = float(err @ err)
        sse_total += sse
        fold_pe[f] = sse / te.shape[0]
        models.append(pf.coef)
    pe_se = float(fold_pe.std(ddof=1) / np.sqrt(plan.k)) if plan.k > 1 else 0.0
    return CvPredictionError(
        pe_mean=sse_total / d.n,
        pe_se=pe_se,
        fold_pe=fold_pe,
        fold_models=tuple(models),
        degenerate_folds=tuple(degenerate),
    )


def cv_fraction_curve(
    d: Dataset,
    fractions: np.ndarray,
    plan: FoldPlan,
    scale_columns: bool = True,
    grid_count: int = 100,
    grid_ratio: float = 1e-3,
    tol: float = 1e-7,
    max_sweeps: int = 10_000,
) -> tuple[np.ndarray, np.ndarray]:
    """CV prediction error of plain LASSO at each standardized bound in `fractions`.

    Within each fold the training path is computed once and refit at the
    penalty matching each target fraction, warm-starting along the way.
    """
    fractions = np.asarray(fractions, dtype=np.float64)
    cfg = LassoConfig(0.0, tol, max_sweeps)
    fold_sse = np.zeros((plan.k, fractions.shape[0]))
    fold_sizes = np.zeros(plan.k)
    for f in range(plan.k):
        tr = np.flatnonzero(plan.assignment != f)
        te = np.flatnonzero(plan.assignment == f)
        fold_sizes[f] = te.shape[0]
        sd_tr = standardize(take(d, tr), scale_columns=scale_columns)
        grid = lambda_grid(sd_tr, grid_count, grid_ratio)
        path_tr = compute_path(sd_tr, grid, cfg)
        Xte = (d.X[te] - sd_tr.column_means) / sd_tr.column_scales
        warm = None
        for idx in np.argsort(fractions):  # ascending fraction == decreasing penalty
            lam = path_tr.lambda_at(float(fractions[idx]))
            if warm is None:
                warm = path_tr.fits[path_tr.nearest_index(lam)].slopes
            fit = fit_lasso(sd_tr, LassoConfig(lam, tol, max_sweeps), warm)
            warm = fit.slopes
            err = d.y[te] - (Xte @ fit.slopes + sd_tr.y_mean)
            fold_sse[f, idx] = float(err @ err)
    fold_pe = fold_sse / fold_sizes[:, None]
    pe_mean = fold_sse.sum(axis=0) / d.n
    pe_se = fold_pe.std(axis=0, ddof=1) / np.sqrt(plan.k) if plan.k > 1 else np.zeros_like(pe_mean)
    return pe_mean, pe_se


def one_se_rule(path: LassoPath, pe_mean: np.ndarray, pe_se: np.ndarray) -> float:
    """Smallest standardized bound whose CV error is within one SE of the best."""
    pe_mean = np.asarray(pe_mean, dtype=np.float64)
    pe_se = np.asarray(pe_se, dtype=np.float64)
    if pe_mean.shape[0] == 0 or pe_mean.shape != pe_se.shape:
        raise ValueError("the CV curve must be non-empty and have matching mean/se lengths")
    if pe_mean.shape[0] != path.s.shape[0]:
        raise ValueError("the CV curve is not aligned with the path grid")
    best = int(np.argmin(pe_mean))
    threshold = pe_mean[best] + pe_se[best]
    eligible = np.flatnonzero(pe_mean <= threshold)
    return float(path.s[eligible].min())


@dataclass(frozen=True)
class EvalReport:
    """Bootstrap prediction-error summary plus coefficient draws for box plots."""

    estimators: tuple[str, ...]
    pe_mean: dict[str, float]
    pe_se: dict[str, float]
    rpe: dict[str, float]
    bootstrap_pe: dict[str, np.ndarray]
    bootstrap_coefficients: dict[str, np.ndarray]
    selected_s: float | None
    feature_names: tuple[str, ...]
    B: int
    skipped: int
    degenerate_fold_events: int


def _default_plan_seed(seed: int, replicate: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(replicate, 1))
    return int(ss.generate_state(1)[0])


def _evaluate_replicate(d: Dataset, specs, seed: int, b: int, plan_folds: int,
                        reselect_fraction: bool):
    """One bootstrap replicate: resample rows, CV every estimator, refit coefficients."""
    n = d.n
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(b, 0)))
    rows = rng.integers(0, n, size=n)
    d_b = take(d, rows)
    plan = kfold_split(n, plan_folds, _default_plan_seed(seed, b))

    if reselect_fraction:
        proto = next(s for s in specs if s.mode == "fraction")
        sd_b = standardize(d_b, scale_columns=proto.scale_columns)
        grid = lambda_grid(sd_b, proto.grid_count, proto.grid_ratio)
        path_b = compute_path(sd_b, grid, LassoConfig(0.0, proto.tol, proto.max_sweeps))
        pe_mean, pe_se = cv_fraction_curve(
            d_b, path_b.s, plan, proto.scale_columns,
            proto.grid_count, proto.grid_ratio, proto.tol, proto.max_sweeps,
        )
        s_b = one_se_rule(path_b, pe_mean, pe_se)
        specs = [
            EstimatorSpec(**{**_spec_dict(s), "value": s_b}) if s.mode == "fraction" else s
            for s in specs
        ]

    sse = {s.name: 0.0 for s in specs}
    degenerate_events = 0
    for f in range(plan.k):
        tr = np.flatnonzero(plan.assignment != f)
        te = np.flatnonzero(plan.assignment == f)
        fits = _fit_group(take(d_b, tr), specs)
        for spec in specs:
            pf = fits[spec.name]
            if pf.degenerate:
                degenerate_events += 1
            err = d_b.y[te] - predict(d_b.X[te], pf.coef)
            sse[spec.name] += float(err @ err)
    pe = {name: v / n for name, v in sse.items()}
    full = _fit_group(d_b, specs)
    coefs = {s.name: np.asarray(full[s.name].slopes) for s in specs}
    return pe, coefs, degenerate_events


def _spec_dict(spec: EstimatorSpec) -> dict:
    return {f: getattr(spec, f) for f in spec.__dataclass_fields__}


def _replicate_chunk(args):
    d, specs, seed, indices, plan_folds, reselect = args
    out = []
    for b in indices:
        try:
            out.append((b, _evaluate_replicate(d, specs, seed, b, plan_folds, reselect)))
        except DataError:
            out.append((b, None))
    return out


def bootstrap_evaluate(
    d: Dataset,
    estimator_specs: Sequence[EstimatorSpec],
    B: int,
    seed: int,
    plan_folds: int = 10,
    reselect_fraction: bool = False,
    workers: int = 1,
) -> EvalReport:
    """Case-resampled bootstrap: CV prediction error per replicate for every estimator.

    Replicates whose resampled design is degenerate (for example a constant
    column under scaling) are skipped and counted; more than 1% skipped fails
    the report. Results are reduced in replicate order, so any worker count
    yields identical output for a given seed.
    """
    if B < 1:
        raise ValueError(f"B must be at least 1, got {B}")
    specs = list(estimator_specs)
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"estimator names must be unique, got {names}")
    if LASSO not in names:
        raise ValueError("a plain LASSO spec is required as the relative-error reference")

    indices = np.arange(B)
    if workers > 1:
        chunks = np.array_split(indices, workers * 4)
        args = [(d, specs, seed, list(ch), plan_folds, reselect_fraction)
                for ch in chunks if len(ch)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(_replicate_chunk, args))
        results = [item for piece in pieces for item in piece]
    else:
        results = _replicate_chunk((d, specs, seed, list(indices), plan_folds,
                                    reselect_fraction))
    results.sort(key=lambda t: t[0])

    kept_pe = {name: [] for name in names}
    kept_coef = {name: [] for name in names}
    skipped = 0
    degenerate_events = 0
    for _, payload in results:
        if payload is None:
            skipped += 1
            continue
        pe, coefs, deg = payload
        degenerate_events += deg
        for name in names:
            kept_pe[name].append(pe[name])
            kept_coef[name].append(coefs[name])
    if skipped > 0.01 * B:
        raise NumericalError(
            f"{skipped} of {B} bootstrap replicates had degenerate designs (> 1%)"
        )

    bootstrap_pe = {name: np.array(kept_pe[name]) for name in names}
    bootstrap_coefficients = {name: np.vstack(kept_coef[name]) for name in names}
    kept = B - skipped
    pe_mean = {name: float(bootstrap_pe[name].mean()) for name in names}
    pe_se = {
        name: float(bootstrap_pe[name].std(ddof=1) / np.sqrt(kept)) if kept > 1 else 0.0
        for name in names
    }
    base = pe_mean[LASSO]
    rpe = {name: pe_mean[name] / base for name in names}

    fractions = {s.value for s in specs if s.mode == "fraction"}
    selected_s = fractions.pop() if len(fractions) == 1 and not reselect_fraction else None
    return EvalReport(
        estimators=tuple(names),
        pe_mean=pe_mean,
        pe_se=pe_se,
        rpe=rpe,
        bootstrap_pe=bootstrap_pe,
        bootstrap_coefficients=bootstrap_coefficients,
        selected_s=selected_s,
        feature_names=d.feature_names,
        B=B,
        skipped=skipped,
        degenerate_fold_events=degenerate_events,
    )


def report_rows(report: EvalReport) -> list[tuple[str, float, float, float]]:
    """Flat rows (estimator, pe_mean, pe_se, rpe) in estimator order."""
    return [
        (name, report.pe_mean[name], report.pe_se[name], report.rpe[name])
        for name in report.estimators
    ]


def coefficient_rows(report: EvalReport) -> list[tuple[int, str, str, float]]:
    """Long-format rows (replicate, estimator, feature, value) for box plots."""
    rows = []
    for name in report.estimators:
        coefs = report.bootstrap_coefficients[name]
        for b in range(coefs.shape[0]):
            for j, feat in enumerate(report.feature_names):
                rows.append((b, name, feat, float(coefs[b, j])))
    return rows
