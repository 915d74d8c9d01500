import numpy as np
import pytest

import steinlasso as sl


@pytest.fixture(scope="session")
def prostate() -> sl.Dataset:
    return sl.load_prostate()


def random_problem(rng, n=None, p=None, sparsity=0.6, scale_cols=True):
    """A random full-column-rank regression problem with some true zeros."""
    n = n or int(rng.integers(20, 60))
    p = p or int(rng.integers(2, 7))
    X = rng.standard_normal((n, p)) @ np.diag(rng.uniform(0.5, 2.0, p))
    beta = rng.standard_normal(p) * (rng.random(p) < sparsity)
    y = X @ beta + rng.standard_normal(n)
    d = sl.Dataset(y=y, X=X, feature_names=tuple(f"x{j}" for j in range(p)))
    return d, sl.standardize(d, scale_columns=scale_cols)


def orthonormal_problem(rng, n, p):
    """A centered problem whose gram matrix is exactly the identity (up to fp)."""
    A = rng.standard_normal((n, p))
    A -= A.mean(axis=0)
    Q, _ = np.linalg.qr(A)
    y = rng.standard_normal(n)
    ym = float(y.mean())
    sd = sl.StandardizedDataset(
        Xc=Q,
        yc=y - ym,
        column_means=np.zeros(p),
        column_scales=np.ones(p),
        y_mean=ym,
        feature_names=tuple(f"q{j}" for j in range(p)),
    )
    return sd
