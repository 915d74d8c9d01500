"""Regression data model: datasets, centering/scaling, and the Gram matrix.

All container types are immutable after construction (frozen dataclasses over
read-only numpy arrays), so they can be shared freely across worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """A raw regression problem: response y (n,), covariates X (n, p), feature names.

    Non-finite entries are rejected at construction, naming the offending column.
    """

    y: np.ndarray
    X: np.ndarray
    feature_names: tuple[str, ...]
    row_labels: tuple[str, ...] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = _readonly(np.atleast_2d(self.X))
        y = _readonly(np.asarray(self.y, dtype=np.float64).ravel())
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(str(s) for s in self.feature_names))
        if X.ndim != 2:
            raise DataError(f"X must be 2-dimensional, got ndim={X.ndim}")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DataError(f"need at least one row and one column, got shape {X.shape}")
        if y.shape[0] != n:
            raise DataError(f"length of y ({y.shape[0]}) does not match rows of X ({n})")
        if len(self.feature_names) != p:
            raise DataError(
                f"got {len(self.feature_names)} feature names for {p} columns"
            )
        if not np.all(np.isfinite(y)):
            bad = int(np.flatnonzero(~np.isfinite(y))[0])
            raise DataError(f"non-finite value in y at row {bad}")
        finite = np.isfinite(X)
        if not finite.all():
            i, j = np.argwhere(~finite)[0]
            raise DataError(
                f"non-finite value in column {self.feature_names[j]!r} at row {int(i)}"
            )
        if self.row_labels is not None:
            labels = tuple(str(s) for s in self.row_labels)
            if len(labels) != n:
                raise DataError(f"got {len(labels)} row labels for {n} rows")
            object.__setattr__(self, "row_labels", labels)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class StandardizedDataset:
    """Centered (optionally unit-scaled) covariates with the statistics to undo it.

    Column means of Xc and the mean of yc are zero to within machine tolerance;
    column_scales are all 1 when scaling was disabled.
    """

    Xc: np.ndarray
    yc: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float
    feature_names: tuple[str, ...]

    def __post_init__(self):
        for name in ("Xc", "yc", "column_means", "column_scales"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        object.__setattr__(self, "y_mean", float(self.y_mean))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        n, p = self.Xc.shape
        if self.yc.shape[0] != n:
            raise DataError("Xc and yc disagree on the number of rows")
        if not (self.column_means.shape[0] == self.column_scales.shape[0] == p):
            raise DataError("per-column statistics disagree with the number of columns")
        if np.any(self.column_scales <= 0):
            raise DataError("column scales must be strictly positive")
        tol = 1e-10 * max(1.0, float(np.max(np.abs(self.Xc), initial=0.0)))
        if np.max(np.abs(self.Xc.mean(axis=0)), initial=0.0) > tol:
            raise DataError("Xc columns are not centered")
        ytol = 1e-10 * max(1.0, float(np.max(np.abs(self.yc), initial=0.0)))
        if abs(float(self.yc.mean())) > ytol:
            raise DataError("yc is not centered")

    @property
    def n(self) -> int:
        return self.Xc.shape[0]

    @property
    def p(self) -> int:
        return self.Xc.shape[1]


@dataclass(frozen=True)
class CoefficientVector:
    """Original-scale regression coefficients: intercept plus one slope per feature."""

    intercept: float
    slopes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "slopes", _readonly(np.asarray(self.slopes).ravel()))


def standardize(d: Dataset, scale_columns: bool = True) -> StandardizedDataset:
    """Center covariates and response; optionally scale columns to unit sample SD.

    Scaling uses the n-1 divisor. A constant column is an error when scaling is
    enabled (its scale would be zero) and is left as-is otherwise.
    """
    means = d.X.mean(axis=0)
    if scale_columns:
        if d.n < 2:
            raise DataError("column scaling needs at least two rows")
        scales = d.X.std(axis=0, ddof=1)
        if np.any(scales == 0):
            j = int(np.flatnonzero(scales == 0)[0])
            raise DataError(
                f"column {d.feature_names[j]!r} has zero variance and cannot be scaled"
            )
    else:
        scales = np.ones(d.p)
    y_mean = float(d.y.mean())
    return StandardizedDataset(
        Xc=(d.X - means) / scales,
        yc=d.y - y_mean,
        column_means=means,
        column_scales=scales,
        y_mean=y_mean,
        feature_names=d.feature_names,
    )


def destandardize(fit_slopes: Sequence[float], sd: StandardizedDataset) -> CoefficientVector:
    """Map slopes fitted on the standardized problem back to original units.

    Predictions of the returned coefficients on raw X agree with predictions of
    fit_slopes on Xc plus y_mean.
    """
    slopes = np.asarray(fit_slopes, dtype=np.float64).ravel()
    if slopes.shape[0] != sd.p:
        raise DataError(f"got {slopes.shape[0]} slopes for {sd.p} columns")
    original = slopes / sd.column_scales
    intercept = sd.y_mean - float(sd.column_means @ original)
    return CoefficientVector(intercept=intercept, slopes=original)


def gram(sd: StandardizedDataset) -> np.ndarray:
    """The p-by-p matrix of inner products of the centered columns (Xc' Xc).

    Exactly symmetric by construction.
    """
    G = sd.Xc.T @ sd.Xc
    return (G + G.T) * 0.5


def predict(X: np.ndarray, coef: CoefficientVector) -> np.ndarray:
    """Evaluate original-scale coefficients on raw covariate rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != coef.slopes.shape[0]:
        raise DataError(f"X has {X.shape[1]} columns but there are {coef.slopes.shape[0]} slopes")
    return coef.intercept + X @ coef.slopes


def take(d: Dataset, rows: np.ndarray) -> Dataset:
    """A new Dataset restricted to (or resampled over) the given row indices."""
    rows = np.asarray(rows)
    labels = None
    if d.row_labels is not None:
        labels = tuple(d.row_labels[int(i)] for i in rows)
    metadata = {
        k: (v[rows] if isinstance(v, np.ndarray) and v.shape[:1] == (d.n,) else v)
        for k, v in d.metadata.items()
    }
    return Dataset(
        y=d.y[rows],
        X=d.X[rows],
        feature_names=d.feature_names,
        row_labels=labels,
        metadata=metadata,
    )
