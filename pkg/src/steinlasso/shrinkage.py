"""Stein-type multiplicative shrinkage applied on top of an L1-penalized fit.

Every estimator here rescales the fitted slopes by a scalar factor driven by
the signal statistic w = b' (Xc'Xc) b / sigma2:

    SL        1 - a / w
    PRSL      max(0, 1 - a / w)
    SL2       1 - a / (w + 1)
    SL3(sqrt) 1 - a / sqrt(w)
    SL3(log)  1 - a log(w) / w

with the dimension constant a = (n - p)(p - 2) / (n - p + 2). Because the
factor is a scalar, the zero pattern of the base fit is always preserved.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .lasso import LassoFit
from .model import StandardizedDataset, gram


def stein_constant(n: int, p: int) -> float:
    """(n - p)(p - 2) / (n - p + 2); needs p >= 3 and n > p to be positive."""
    if p < 3:
        raise DataError(
            f"shrinkage needs at least 3 coefficients (got p={p}); "
            "with p < 3 the constant is non-positive and no Stein effect exists"
        )
    if n <= p:
        raise DataError(f"shrinkage needs more rows than columns (got n={n}, p={p})")
    return (n - p) * (p - 2) / (n - p + 2)


def residual_variance(sd: StandardizedDataset) -> float:
    """Residual variance of the unpenalized least-squares fit, RSS / (n - p)."""
    n, p = sd.n, sd.p
    if n <= p:
        raise DataError(f"residual variance needs n > p (got n={n}, p={p})")
    coef, _, rank, _ = np.linalg.lstsq(sd.Xc, sd.yc, rcond=None)
    if rank < p:
        warnings.warn(
            f"design is rank deficient (rank {rank} < {p}); using the pseudo-inverse solution",
            RuntimeWarning,
            stacklevel=2,
        )
    r = sd.yc - sd.Xc @ coef
    return float(r @ r) / (n - p)


def signal_statistic(slopes: np.ndarray, G: np.ndarray, sigma2: float) -> float:
    """Quadratic-form signal strength b' G b / sigma2 of a fitted slope vector."""
    if sigma2 <= 0:
        raise DataError(f"sigma2 must be positive, got {sigma2}")
    slopes = np.asarray(slopes, dtype=np.float64)
    if G.shape != (slopes.shape[0], slopes.shape[0]):
        raise DataError(f"gram matrix shape {G.shape} does not match {slopes.shape[0]} slopes")
    return max(float(slopes @ (G @ slopes)) / sigma2, 0.0)


class ShrinkageVariant(enum.Enum):
    SL = "sl"
    PRSL = "prsl"
    SL2 = "sl2"
    SL3_SQRT = "sl3-sqrt"
    SL3_LOG = "sl3-log"

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class SteinInputs:
    """The pieces the shrinkage factor is computed from, all from one dataset and fit."""

    a: float
    w: float
    sigma2: float
    n: int
    p: int

    def __post_init__(self):
        if self.w < 0:
            raise DataError(f"signal statistic must be non-negative, got {self.w}")
        if self.sigma2 <= 0:
            raise DataError(f"sigma2 must be positive, got {self.sigma2}")
        if self.a != stein_constant(self.n, self.p):
            raise DataError(
                f"a={self.a!r} is not the dimension constant for n={self.n}, p={self.p}"
            )


def stein_inputs(fit: LassoFit, sd: StandardizedDataset) -> SteinInputs:
    """Compute the shrinkage inputs for a fit on the dataset it was fitted to."""
    if fit.slopes.shape[0] != sd.p:
        raise DataError("fit and dataset disagree on the number of columns")
    sigma2 = residual_variance(sd)
    w = signal_statistic(fit.slopes, gram(sd), sigma2)
    return SteinInputs(a=stein_constant(sd.n, sd.p), w=w, sigma2=sigma2, n=sd.n, p=sd.p)


@dataclass(frozen=True)
class ShrunkenFit:
    """A base fit rescaled by a scalar factor.

    degenerate marks the w = 0 case where the factor is defined as 0;
    expanded marks factors above 1 (possible for SL3(log) when 0 < w < 1).
    """

    base: LassoFit
    variant: ShrinkageVariant
    factor: float
    slopes: np.ndarray
    inputs: SteinInputs
    degenerate: bool = False
    expanded: bool = False

    def __post_init__(self):
        slopes = np.asarray(self.slopes, dtype=np.float64).copy()
        slopes.setflags(write=False)
        object.__setattr__(self, "slopes", slopes)


def shrinkage_factor(variant: ShrinkageVariant, a: float, w: float) -> tuple[float, bool]:
    """(factor, degenerate). Only SL2 is defined at w = 0; the rest collapse to 0 there."""
    if variant is ShrinkageVariant.SL2:
        return 1.0 - a / (w + 1.0), False
    if w == 0.0:
        return 0.0, True
    if variant is ShrinkageVariant.SL:
        return 1.0 - a / w, False
    if variant is ShrinkageVariant.PRSL:
        return max(0.0, 1.0 - a / w), False
    if variant is ShrinkageVariant.SL3_SQRT:
        return 1.0 - a / np.sqrt(w), False
    if variant is ShrinkageVariant.SL3_LOG:
        return 1.0 - a * np.log(w) / w, False
    raise ValueError(f"unknown variant {variant!r}")


def shrink(fit: LassoFit, variant: ShrinkageVariant, inputs: SteinInputs) -> ShrunkenFit:
    """Rescale the fitted slopes by the variant's factor, componentwise exact."""
    if fit.slopes.shape[0] != inputs.p:
        raise DataError("fit and inputs disagree on the number of columns")
    factor, degenerate = shrinkage_factor(variant, inputs.a, inputs.w)
    factor = float(factor)
    slopes = np.zeros_like(fit.slopes) if factor == 0.0 else factor * fit.slopes
    return ShrunkenFit(
        base=fit,
        variant=variant,
        factor=factor,
        slopes=slopes,
        inputs=inputs,
        degenerate=degenerate,
        expanded=factor > 1.0,
    )


def stein_condition_value(
    slopes: np.ndarray,
    G: np.ndarray,
    sigma2: float,
    a: float,
    step: float = 1e-5,
) -> float:
    """||g||^2 + 2 div g at the fit, for g(b) = -(a sigma2 / (b'Gb)) b.

    The divergence is estimated by central finite differences with the given
    step; a negative value certifies the risk-improvement condition locally.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if sigma2 <= 0:
        raise DataError(f"sigma2 must be positive, got {sigma2}")
    b = np.asarray(slopes, dtype=np.float64).copy()
    if not np.any(b):
        raise DataError("the condition value is undefined at an all-zero fit (w = 0)")

    def g(v: np.ndarray) -> np.ndarray:
        return -(a * sigma2 / float(v @ (G @ v))) * v

    gb = g(b)
    div = 0.0
    for j in range(b.shape[0]):
        saved = b[j]
        b[j] = saved + step
        hi = g(b)[j]
        b[j] = saved - step
        lo = g(b)[j]
        b[j] = saved
        div += (hi - lo) / (2.0 * step)
    return float(gb @ gb + 2.0 * div)
