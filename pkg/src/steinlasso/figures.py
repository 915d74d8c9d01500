"""Matplotlib renderings of the study outputs, written as deterministic SVG files.

Every function takes data plus an output path and returns the path. Figures
are reproducible byte-for-byte: the SVG hash salt is pinned and the embedded
creation date is suppressed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLES = {
    "lasso": dict(color="black", linestyle="-"),
    "sl": dict(color="tab:red", linestyle="--"),
    "prsl": dict(color="tab:blue", linestyle="-"),
    "sl2": dict(color="tab:green", linestyle="-."),
    "sl3-sqrt": dict(color="tab:orange", linestyle=":"),
    "sl3-log": dict(color="tab:purple", linestyle="--"),
}


def _save(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "steinlasso"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_rmse_curves(r2_grid, estimators, rmse, path) -> Path:
    """Relative MSE versus population R^2, one line per estimator, reference at 1."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, name in enumerate(estimators):
        ax.plot(r2_grid, rmse[:, i], label=name, **_STYLES.get(name, {}))
    ax.axhline(1.0, color="gray", linewidth=0.8)
    ax.set_xlabel("population $R^2$")
    ax.set_ylabel("relative MSE")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_coefficient_paths(s, coefficients, feature_names, selected_s, path) -> Path:
    """Standardized coefficients versus the standardized bound, with the chosen cut."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for j, name in enumerate(feature_names):
        ax.plot(s, coefficients[:, j], label=name)
    if selected_s is not None:
        ax.axvline(selected_s, color="gray", linestyle="--", linewidth=0.8)
    ax.axhline(0.0, color="gray", linewidth=0.5)
    ax.set_xlabel("standardized bound $s$")
    ax.set_ylabel("coefficient")
    ax.legend(frameon=False, fontsize=8, ncol=2)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_bootstrap_coefficients(report, path) -> Path:
    """Box plots of bootstrap coefficient draws, one panel per feature."""
    names = report.estimators
    features = report.feature_names
    ncol = 4
    nrow = int(np.ceil(len(features) / ncol))
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 2.6 * nrow), sharey=False)
    axes = np.atleast_2d(axes)
    for j, feat in enumerate(features):
        ax = axes[j // ncol, j % ncol]
        data = [report.bootstrap_coefficients[name][:, j] for name in names]
        ax.boxplot(data, tick_labels=[n.replace("sl3-", "sl3\n") for n in names],
                   showfliers=False)
        ax.axhline(0.0, color="gray", linewidth=0.5)
        ax.set_title(feat, fontsize=9)
        ax.tick_params(labelsize=7)
    for j in range(len(features), nrow * ncol):
        axes[j // ncol, j % ncol].set_visible(False)
    fig.tight_layout()
    return _save(fig, path)
