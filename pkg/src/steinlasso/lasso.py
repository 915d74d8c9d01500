"""L1-penalized least squares by cyclic coordinate descent, plus penalty paths.

The objective is kept in its unnormalized form

    ||yc - Xc b||^2 + lam * ||b||_1

so the penalty is directly comparable across tools that use the same
convention. Against the common 1/(2n) scaling, lam here equals 2n times the
scaled penalty. The all-zero threshold is lambda_max = 2 max_j |Xc' yc|_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _solver
from .errors import DataError
from .model import StandardizedDataset, gram


def soft_threshold(z: float, t: float) -> float:
    """sign(z) * max(|z| - t, 0) for a non-negative threshold t."""
    if t < 0:
        raise ValueError(f"threshold must be non-negative, got {t}")
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@dataclass(frozen=True)
class LassoConfig:
    """Penalty value and stopping rule for one solve.

    tol bounds the largest absolute coefficient change over a full sweep;
    check_objective additionally verifies the objective never increases
    between sweeps (slow, meant for tests).
    """

    lam: float
    tol: float = 1e-7
    max_sweeps: int = 10_000
    check_objective: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"penalty must be non-negative, got {self.lam}")
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be at least 1, got {self.max_sweeps}")


@dataclass(frozen=True)
class LassoFit:
    """Solver output at one penalty value."""

    slopes: np.ndarray
    lam: float
    sweeps_used: int
    converged: bool
    objective: float

    def __post_init__(self):
        slopes = np.asarray(self.slopes, dtype=np.float64).copy()
        slopes.setflags(write=False)
        object.__setattr__(self, "slopes", slopes)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.slopes)


@dataclass(frozen=True)
class LassoPath:
    """Fits along a strictly decreasing penalty grid, with the standardized bound s.

    s is the L1 norm of each fit divided by the L1 norm of the densest
    (least-penalized) fit on the path, so s runs from 0 toward 1.
    """

    lambdas: np.ndarray
    fits: tuple[LassoFit, ...]
    s: np.ndarray
    feature_names: tuple[str, ...]

    @property
    def coefficients(self) -> np.ndarray:
        """Matrix of slopes, one row per grid point."""
        return np.vstack([f.slopes for f in self.fits])

    def lambda_at(self, fraction: float) -> float:
        """Penalty whose fit has standardized bound `fraction`, by log-linear interpolation."""
        if not 0.0 <= fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
        if len(self.fits) == 1:
            return float(self.lambdas[0])
        return float(np.exp(np.interp(fraction, self.s, np.log(self.lambdas))))

    def nearest_index(self, lam: float) -> int:
        return int(np.argmin(np.abs(np.log(self.lambdas) - math.log(lam))))


def _gram_pieces(sd: StandardizedDataset) -> tuple[np.ndarray, np.ndarray, float]:
    G = gram(sd)
    c = sd.Xc.T @ sd.yc
    yty = float(sd.yc @ sd.yc)
    return G, c, yty


def _objective_gram(beta: np.ndarray, G: np.ndarray, c: np.ndarray, yty: float, lam: float) -> float:
    return float(yty - 2.0 * (c @ beta) + beta @ (G @ beta) + lam * np.abs(beta).sum())


def objective_value(slopes: np.ndarray, sd: StandardizedDataset, lam: float) -> float:
    """Penalized residual sum of squares of the given slopes."""
    slopes = np.asarray(slopes, dtype=np.float64)
    r = sd.yc - sd.Xc @ slopes
    return float(r @ r + lam * np.abs(slopes).sum())


def kkt_violation(slopes: np.ndarray, sd: StandardizedDataset, lam: float) -> float:
    """Largest violation of the subgradient optimality conditions.

    For an active coordinate the residual-sum-of-squares gradient must cancel
    lam * sign(b_j); for an inactive one its magnitude must not exceed lam.
    """
    slopes = np.asarray(slopes, dtype=np.float64)
    grad = -2.0 * (sd.Xc.T @ (sd.yc - sd.Xc @ slopes))
    active = slopes != 0
    worst = 0.0
    if active.any():
        worst = float(np.max(np.abs(grad[active] + lam * np.sign(slopes[active]))))
    if (~active).any():
        worst = max(worst, float(np.max(np.abs(grad[~active]) - lam, initial=0.0)))
    return worst


def _fit_gram(
    G: np.ndarray,
    c: np.ndarray,
    yty: float,
    cfg: LassoConfig,
    warm_start: np.ndarray | None = None,
) -> LassoFit:
    p = c.shape[0]
    if warm_start is None:
        beta = np.zeros(p)
    else:
        beta = np.asarray(warm_start, dtype=np.float64).copy()
        if beta.shape != (p,):
            raise DataError(f"warm start has shape {beta.shape}, expected ({p},)")
    kkt_tol = min(10.0 * cfg.tol, cfg.tol * (1.0 + cfg.lam))
    if cfg.check_objective:
        sweeps, converged = 0, False
        prev = _objective_gram(beta, G, c, yty, cfg.lam)
        for _ in range(cfg.max_sweeps):
            _, done = _solver.cd_sweeps(G, c, cfg.lam, beta, cfg.tol, kkt_tol, 1)
            sweeps += 1
            cur = _objective_gram(beta, G, c, yty, cfg.lam)
            if cur > prev + 1e-9 * (1.0 + abs(prev)):
                raise AssertionError(
                    f"objective increased between sweeps: {prev!r} -> {cur!r}"
                )
            prev = cur
            if done:
                converged = True
                break
    else:
        sweeps, converged = _solver.cd_sweeps(G, c, cfg.lam, beta, cfg.tol, kkt_tol, cfg.max_sweeps)
    return LassoFit(
        slopes=beta,
        lam=cfg.lam,
        sweeps_used=int(sweeps),
        converged=bool(converged),
        objective=_objective_gram(beta, G, c, yty, cfg.lam),
    )


def fit_lasso(
    sd: StandardizedDataset,
    cfg: LassoConfig,
    warm_start: np.ndarray | None = None,
) -> LassoFit:
    """Minimize the penalized criterion on a centered problem.

    Non-convergence within max_sweeps is reported on the returned fit, never
    raised; a warm start of the wrong length is an error.
    """
    G, c, yty = _gram_pieces(sd)
    return _fit_gram(G, c, yty, cfg, warm_start)


def lambda_max(sd: StandardizedDataset) -> float:
    """Smallest penalty at which the solution is identically zero."""
    return 2.0 * float(np.max(np.abs(sd.Xc.T @ sd.yc)))


def lambda_grid(sd: StandardizedDataset, count: int = 100, ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced decreasing penalties from lambda_max down to ratio * lambda_max."""
    if count < 2:
        raise ValueError(f"count must be at least 2, got {count}")
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    top = lambda_max(sd)
    if top == 0.0:
        # response orthogonal to every column; all penalties are equivalent
        return np.zeros(count)
    return np.geomspace(top, ratio * top, count)


def standardized_bound(slopes: np.ndarray, reference_norm: float) -> float:
    """L1 norm of the slopes divided by the reference norm (0 when the reference is 0)."""
    if reference_norm < 0:
        raise ValueError(f"reference norm must be non-negative, got {reference_norm}")
    if reference_norm == 0:
        return 0.0
    return float(np.abs(np.asarray(slopes)).sum() / reference_norm)


def compute_path(sd: StandardizedDataset, grid: np.ndarray, cfg: LassoConfig) -> LassoPath:
    """Warm-started fits along a strictly decreasing penalty grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if grid.size > 1 and not np.all(np.diff(grid) < 0):
        raise ValueError("grid must be strictly decreasing")
    G, c, yty = _gram_pieces(sd)
    fits = []
    warm = None
    for lam in grid:
        fit = _fit_gram(G, c, yty, LassoConfig(float(lam), cfg.tol, cfg.max_sweeps, cfg.check_objective), warm)
        fits.append(fit)
        warm = fit.slopes
    reference = float(np.abs(fits[-1].slopes).sum())
    s = np.array([standardized_bound(f.slopes, reference) for f in fits])
    s = np.clip(s, 0.0, 1.0)
    return LassoPath(lambdas=grid, fits=tuple(fits), s=s, feature_names=sd.feature_names)
