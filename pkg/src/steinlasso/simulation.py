"""Monte Carlo risk study of the shrinkage estimators against plain LASSO.

Data are drawn from an intercept-free Gaussian linear model with standard
normal predictors and errors. Coefficients follow the power-decay sequence
beta_j = scale * sqrt(2 alpha) * j^(-alpha/2); the scale maps a target
population R^2 through R^2 = scale^2 / (1 + scale^2). Estimation error is
the squared coefficient distance ||bhat - beta||^2, and every estimator's
mean error is reported relative to LASSO's.

Results are deterministic for a given seed under any worker count: each
(grid point, replication) cell derives its own random stream by counter.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _solver
from .errors import DataError
from .model import Dataset
from .shrinkage import ShrinkageVariant, shrinkage_factor, stein_constant

LASSO = "lasso"
ALL_ESTIMATORS = (LASSO,) + tuple(v.value for v in ShrinkageVariant)
_VARIANTS = {v.value: v for v in ShrinkageVariant}

TABLE_HEADER = ("r2", "estimator", "mse", "rmse", "mc_se")


def signal_scale_from_r2(r2: float) -> float:
    """Invert R^2 = scale^2 / (1 + scale^2): returns sqrt(r2 / (1 - r2))."""
    if not 0 <= r2 < 1:
        raise ValueError(f"r2 must lie in [0, 1), got {r2}")
    return float(np.sqrt(r2 / (1.0 - r2)))


def decaying_coefficients(p: int, alpha: float, scale: float) -> np.ndarray:
    """beta_j = scale * sqrt(2 alpha) * j^(-alpha/2) for j = 1..p."""
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if scale < 0:
        raise ValueError(f"scale must be non-negative, got {scale}")
    j = np.arange(1, p + 1, dtype=np.float64)
    return scale * np.sqrt(2.0 * alpha) * j ** (-alpha / 2.0)


def generate_replication(n: int, beta: Sequence[float], rng: np.random.Generator) -> Dataset:
    """One draw of the simulation model: X iid N(0,1), y = X beta + N(0,1) noise."""
    beta = np.asarray(beta, dtype=np.float64)
    p = beta.shape[0]
    X = rng.standard_normal((n, p))
    y = X @ beta + rng.standard_normal(n)
    return Dataset(y=y, X=X, feature_names=tuple(f"x{j + 1}" for j in range(p)))


@dataclass(frozen=True)
class LambdaRule:
    """How the penalty is chosen on each replication.

    "cv-min" picks the grid value minimizing k-fold prediction error, refitting
    each training part from scratch; "fixed" uses `value` directly. Which rule
    matches the original study is unknown, so the choice is explicit here.
    """

    mode: str = "cv-min"
    value: float | None = None
    folds: int = 10
    grid_count: int = 100
    grid_ratio: float = 1e-3

    def __post_init__(self):
        if self.mode not in ("cv-min", "fixed"):
            raise ValueError(f"unknown lambda rule mode {self.mode!r}")
        if self.mode == "fixed":
            if self.value is None or self.value < 0:
                raise ValueError("fixed mode needs a non-negative penalty value")
        if self.folds < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds}")
        if self.grid_count < 2 or not 0 < self.grid_ratio < 1:
            raise ValueError("grid_count must be >= 2 and grid_ratio in (0, 1)")


@dataclass(frozen=True)
class SimConfig:
    """One cell family of the study: sample size, dimension, decay, R^2 sweep."""

    n: int
    p: int
    alpha: float
    r2_max: float
    grid_points: int = 20
    replications: int = 1000
    seed: int = 42
    estimators: tuple[str, ...] = ALL_ESTIMATORS
    lambda_rule: LambdaRule = field(default_factory=LambdaRule)
    tol: float = 1e-7
    max_sweeps: int = 10_000

    def __post_init__(self):
        if not self.n > self.p >= 3:
            raise ValueError(f"need n > p >= 3, got n={self.n}, p={self.p}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.r2_max < 1:
            raise ValueError(f"r2_max must lie in (0, 1), got {self.r2_max}")
        if self.grid_points < 2:
            raise ValueError(f"grid_points must be at least 2, got {self.grid_points}")
        if self.replications < 1:
            raise ValueError(f"replications must be at least 1, got {self.replications}")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        unknown = [e for e in self.estimators if e not in ALL_ESTIMATORS]
        if unknown:
            raise ValueError(f"unknown estimators {unknown}; choose from {ALL_ESTIMATORS}")


@dataclass(frozen=True)
class SimResult:
    """Per (R^2 grid point, estimator) mean squared error, relative MSE, and MC error."""

    r2_grid: np.ndarray
    estimators: tuple[str, ...]
    mse: np.ndarray
    rmse: np.ndarray
    mc_se: np.ndarray
    metadata: dict


def _rng_for(seed: int, grid_index: int, replication: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(grid_index, replication))
    )


def _fit_one(X: np.ndarray, y: np.ndarray, rng: np.random.Generator,
             rule: LambdaRule, tol: float, max_sweeps: int):
    """Center, choose the penalty per the rule, and fit on the full replication.

    Returns (slopes, gram, sigma2, lam, converged).
    """
    n, p = X.shape
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    G = Xc.T @ Xc
    G = (G + G.T) * 0.5
    c = Xc.T @ yc

    if rule.mode == "fixed":
        lam = float(rule.value)
        beta = np.zeros(p)
        kkt_tol = min(10.0 * tol, tol * (1.0 + lam))
        _, converged = _solver.cd_sweeps(G, c, lam, beta, tol, kkt_tol, max_sweeps)
    else:
        top = 2.0 * float(np.max(np.abs(c)))
        if top == 0.0:
            lams = np.zeros(rule.grid_count)
        else:
            lams = np.geomspace(top, rule.grid_ratio * top, rule.grid_count)
        fold = np.empty(n, dtype=np.int64)
        fold[rng.permutation(n)] = np.arange(n) % rule.folds
        sse = np.zeros(rule.grid_count)
        for f in range(rule.folds):
            train = fold != f
            Xtr, ytr = X[train], y[train]
            mtr = Xtr.mean(axis=0)
            ytr_mean = ytr.mean()
            Xtr_c = Xtr - mtr
            Gtr = Xtr_c.T @ Xtr_c
            Gtr = (Gtr + Gtr.T) * 0.5
            ctr = Xtr_c.T @ (ytr - ytr_mean)
            betas, _, _ = _solver.cd_path(Gtr, ctr, lams, tol, max_sweeps)
            Xte_c = X[~train] - mtr
            preds = Xte_c @ betas.T + ytr_mean
            sse += ((y[~train][:, None] - preds) ** 2).sum(axis=0)
        best = int(np.argmin(sse))
        lam = float(lams[best])
        betas, _, conv = _solver.cd_path(G, c, lams[: best + 1], tol, max_sweeps)
        beta = betas[-1]
        converged = bool(conv[-1])

    coef, _, _, _ = np.linalg.lstsq(Xc, yc, rcond=None)
    resid = yc - Xc @ coef
    sigma2 = float(resid @ resid) / (n - p)
    return beta, G, sigma2, lam, converged


def replication_losses(
    n: int,
    beta: Sequence[float],
    estimators: Sequence[str],
    replications: int,
    seed: int,
    grid_index: int = 0,
    lambda_rule: LambdaRule | None = None,
    tol: float = 1e-7,
    max_sweeps: int = 10_000,
) -> tuple[dict[str, np.ndarray], dict]:
    """Squared coefficient-error samples per estimator over independent replications.

    The LASSO loss is always computed (it is the reference); variant losses are
    returned only for the requested estimators. Solver non-convergence is
    counted, never raised.
    """
    rule = lambda_rule or LambdaRule()
    beta = np.asarray(beta, dtype=np.float64)
    p = beta.shape[0]
    a = stein_constant(n, p)
    names = list(dict.fromkeys(estimators))
    losses = {name: np.empty(replications) for name in set(names) | {LASSO}}
    lams = np.empty(replications)
    nonconverged = 0
    for r in range(replications):
        rng = _rng_for(seed, grid_index, r)
        X = rng.standard_normal((n, p))
        y = X @ beta + rng.standard_normal(n)
        slopes, G, sigma2, lam, converged = _fit_one(X, y, rng, rule, tol, max_sweeps)
        if not converged:
            nonconverged += 1
        lams[r] = lam
        w = max(float(slopes @ (G @ slopes)) / sigma2, 0.0)
        err = slopes - beta
        losses[LASSO][r] = float(err @ err)
        for name in names:
            if name == LASSO:
                continue
            factor, _ = shrinkage_factor(_VARIANTS[name], a, w)
            err = factor * slopes - beta
            losses[name][r] = float(err @ err)
    info = {"nonconverged": nonconverged, "selected_lambdas": lams}
    return losses, info


def _grid_point(cfg: SimConfig, grid_index: int, r2: float):
    scale = signal_scale_from_r2(r2)
    beta = decaying_coefficients(cfg.p, cfg.alpha, scale)
    losses, info = replication_losses(
        cfg.n, beta, cfg.estimators, cfg.replications, cfg.seed,
        grid_index=grid_index, lambda_rule=cfg.lambda_rule,
        tol=cfg.tol, max_sweeps=cfg.max_sweeps,
    )
    base = losses[LASSO]
    mse_lasso = float(base.mean())
    mse = np.empty(len(cfg.estimators))
    rmse = np.empty(len(cfg.estimators))
    mc_se = np.empty(len(cfg.estimators))
    for i, name in enumerate(cfg.estimators):
        sample = losses[name]
        mse[i] = float(sample.mean())
        rmse[i] = mse[i] / mse_lasso if mse_lasso > 0 else 1.0
        mc_se[i] = float(sample.std(ddof=1) / np.sqrt(cfg.replications)) if cfg.replications > 1 else 0.0
    return grid_index, mse, rmse, mc_se, info["nonconverged"], float(beta @ beta)


def run_simulation(cfg: SimConfig, workers: int = 1) -> SimResult:
    """Sweep the R^2 grid, replicating each point and averaging estimator losses.

    Grid points are independent work units; with workers > 1 they run in
    separate processes and are reduced in grid order, so the result is
    identical to a serial run.
    """
    r2_grid = np.linspace(0.0, cfg.r2_max, cfg.grid_points)
    tasks = [(cfg, gi, float(r2)) for gi, r2 in enumerate(r2_grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_point_star, tasks))
    else:
        results = [_grid_point(*t) for t in tasks]
    results.sort(key=lambda r: r[0])

    g, e = cfg.grid_points, len(cfg.estimators)
    mse = np.zeros((g, e))
    rmse = np.zeros((g, e))
    mc_se = np.zeros((g, e))
    nonconverged = 0
    signal = np.zeros(g)
    for gi, m, rm, se, nc, sig in results:
        mse[gi], rmse[gi], mc_se[gi] = m, rm, se
        nonconverged += nc
        signal[gi] = sig
    metadata = {
        "config": asdict(cfg),
        "nonconverged": nonconverged,
        "achieved_signal_norms": signal.tolist(),
    }
    return SimResult(
        r2_grid=r2_grid,
        estimators=cfg.estimators,
        mse=mse,
        rmse=rmse,
        mc_se=mc_se,
        metadata=metadata,
    )


def _grid_point_star(args):
    return _grid_point(*args)


def export_rmse_table(result: SimResult) -> list[tuple[float, str, float, float, float]]:
    """Flat rows (r2, estimator, mse, rmse, mc_se), grid-major then estimator order."""
    rows = []
    for gi, r2 in enumerate(result.r2_grid):
        for ei, name in enumerate(result.estimators):
            rows.append(
                (
                    float(r2),
                    name,
                    float(result.mse[gi, ei]),
                    float(result.rmse[gi, ei]),
                    float(result.mc_se[gi, ei]),
                )
            )
    return rows
