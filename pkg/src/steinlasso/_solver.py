"""Numba kernels for cyclic coordinate descent on the gram form of the problem.

The objective is the unnormalized penalized residual sum of squares

    ||yc - Xc b||^2 + lam * sum_j |b_j|

which, after expanding, depends on the data only through G = Xc'Xc, c = Xc'yc
and yc'yc. A coordinate update with everything else held fixed is the soft
threshold of the partial residual correlation at lam/2, divided by G[j, j].

A solve counts as converged only when the largest coefficient change over a
sweep is below tol AND the subgradient optimality violation, measured on
freshly recomputed products, is below kkt_tol.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _kkt_violation(G, c, lam, beta, Gbeta):
    """Max subgradient violation: active coords must cancel lam*sign, inactive stay within lam."""
    viol = 0.0
    for j in range(beta.shape[0]):
        gj = 2.0 * (Gbeta[j] - c[j])
        if beta[j] > 0.0:
            v = abs(gj + lam)
        elif beta[j] < 0.0:
            v = abs(gj - lam)
        else:
            v = abs(gj) - lam
            if v < 0.0:
                v = 0.0
        if v > viol:
            viol = v
    return viol


@numba.njit(cache=True)
def cd_sweeps(G, c, lam, beta, tol, kkt_tol, max_sweeps):
    """Run full sweeps until coefficient changes settle and the KKT check passes.

    beta is updated in place. Returns (sweeps_used, converged). Columns with
    G[j, j] == 0 (constant after centering) are pinned at zero.
    """
    p = beta.shape[0]
    Gbeta = G @ beta
    half = 0.5 * lam
    sweeps = 0
    for sweep in range(max_sweeps):
        max_delta = 0.0
        for j in range(p):
            gjj = G[j, j]
            old = beta[j]
            if gjj <= 0.0:
                if old != 0.0:
                    beta[j] = 0.0
                    for k in range(p):
                        Gbeta[k] -= old * G[k, j]
                continue
            rho = c[j] - Gbeta[j] + gjj * old
            if rho > half:
                new = (rho - half) / gjj
            elif rho < -half:
                new = (rho + half) / gjj
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                for k in range(p):
                    Gbeta[k] += delta * G[k, j]
                ad = abs(delta)
                if ad > max_delta:
                    max_delta = ad
        sweeps = sweep + 1
        if max_delta <= tol:
            Gbeta = G @ beta  # certify on fresh products, not the running update
            if _kkt_violation(G, c, lam, beta, Gbeta) <= kkt_tol:
                return sweeps, True
        elif (sweep & 63) == 63:
            # refresh the running product to cap accumulated rounding drift
            Gbeta = G @ beta
    return sweeps, False


@numba.njit(cache=True)
def cd_path(G, c, lams, tol, max_sweeps):
    """Solve along a decreasing penalty grid with warm starts.

    Returns (betas, sweeps, converged) with one row per grid value.
    """
    m = lams.shape[0]
    p = G.shape[0]
    betas = np.zeros((m, p))
    sweeps = np.zeros(m, np.int64)
    converged = np.zeros(m, np.bool_)
    beta = np.zeros(p)
    for i in range(m):
        kt = 10.0 * tol
        alt = tol * (1.0 + lams[i])
        if alt < kt:
            kt = alt
        s, ok = cd_sweeps(G, c, lams[i], beta, tol, kt, max_sweeps)
        sweeps[i] = s
        converged[i] = ok
        betas[i, :] = beta
    return betas, sweeps, converged
