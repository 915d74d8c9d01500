import numpy as np
import pytest

import steinlasso as sl
from steinlasso.errors import DataError

from conftest import random_problem

VARIANTS = list(sl.ShrinkageVariant)


def make_fit(slopes, lam=1.0):
    slopes = np.asarray(slopes, dtype=np.float64)
    return sl.LassoFit(slopes=slopes, lam=lam, sweeps_used=1, converged=True, objective=0.0)


def make_inputs(n, p, w, sigma2=1.0):
    return sl.SteinInputs(a=sl.stein_constant(n, p), w=w, sigma2=sigma2, n=n, p=p)


class TestSteinConstant:
    def test_known_values(self):
        assert sl.stein_constant(50, 10) == (40 * 8) / 42
        assert sl.stein_constant(5, 3) == 0.5
        assert sl.stein_constant(100, 30) == (70 * 28) / 72

    def test_dimension_requirements(self):
        with pytest.raises(DataError, match="at least 3"):
            sl.stein_constant(10, 2)
        with pytest.raises(DataError, match="more rows"):
            sl.stein_constant(5, 5)


class TestResidualVariance:
    def test_exact_fit_gives_zero(self):
        rng = np.random.default_rng(50)
        X = rng.standard_normal((10, 3))
        beta = rng.standard_normal(3)
        Xc = X - X.mean(axis=0)
        y = Xc @ beta  # already centered response, exactly in the column space
        d = sl.Dataset(y=y, X=X, feature_names=("a", "b", "c"))
        sd = sl.standardize(d, scale_columns=False)
        assert sl.residual_variance(sd) == pytest.approx(0.0, abs=1e-20)

    def test_hand_ols_oracle(self):
        # Xc = (-1, 0, 0, 1), yc = (-1, 1, -1, 1): slope 1, RSS 2, variance 2/3
        sd = sl.StandardizedDataset(
            Xc=np.array([[-1.0], [0.0], [0.0], [1.0]]),
            yc=np.array([-1.0, 1.0, -1.0, 1.0]),
            column_means=np.zeros(1),
            column_scales=np.ones(1),
            y_mean=0.0,
            feature_names=("x",),
        )
        assert sl.residual_variance(sd) == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_prostate_positive_and_deterministic(self, prostate):
        sd = sl.standardize(prostate)
        v1 = sl.residual_variance(sd)
        v2 = sl.residual_variance(sl.standardize(prostate))
        assert v1 > 0
        assert v1 == v2

    def test_needs_more_rows_than_columns(self):
        rng = np.random.default_rng(51)
        X = rng.standard_normal((3, 3))
        d = sl.Dataset(y=rng.standard_normal(3), X=X, feature_names=("a", "b", "c"))
        sd = sl.standardize(d, scale_columns=False)
        with pytest.raises(DataError, match="n > p"):
            sl.residual_variance(sd)

    def test_rank_deficiency_warns(self):
        x = np.arange(6.0)
        X = np.column_stack([x, 2 * x, np.random.default_rng(1).standard_normal(6)])
        d = sl.Dataset(y=x, X=X, feature_names=("a", "b", "c"))
        sd = sl.standardize(d, scale_columns=False)
        with pytest.warns(RuntimeWarning, match="rank deficient"):
            sl.residual_variance(sd)


class TestSignalStatistic:
    def test_zero_slopes(self):
        assert sl.signal_statistic(np.zeros(4), np.eye(4), 1.0) == 0.0

    def test_identity_gram_unit_sigma(self):
        slopes = np.array([1.0, -2.0, 0.5])
        assert sl.signal_statistic(slopes, np.eye(3), 1.0) == pytest.approx(
            float(slopes @ slopes), rel=1e-14
        )

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            _, sd = random_problem(rng, n=6, p=3)
            G = sl.gram(sd)
            slopes = rng.standard_normal(3)
            sigma2 = float(rng.uniform(0.2, 3.0))
            brute = 0.0
            for j in range(3):
                for k in range(3):
                    brute += slopes[j] * G[j, k] * slopes[k]
            brute /= sigma2
            assert sl.signal_statistic(slopes, G, sigma2) == pytest.approx(brute, abs=1e-10)

    def test_sigma2_must_be_positive(self):
        with pytest.raises(DataError):
            sl.signal_statistic(np.ones(3), np.eye(3), 0.0)


class TestShrink:
    def test_prsl_zeroes_when_signal_below_constant(self):
        inputs = make_inputs(50, 10, w=5.0)  # a ~ 7.62 > w
        fit = make_fit([1.0, -2.0, 0.0, 0.5] + [0.0] * 6)
        out = sl.shrink(fit, sl.ShrinkageVariant.PRSL, inputs)
        assert out.factor == 0.0
        assert np.array_equal(out.slopes, np.zeros(10))

    def test_sl_factor_half_at_twice_constant(self):
        a = sl.stein_constant(50, 10)
        inputs = make_inputs(50, 10, w=2 * a)
        fit = make_fit(np.arange(10, dtype=float))
        out = sl.shrink(fit, sl.ShrinkageVariant.SL, inputs)
        assert out.factor == 0.5

    def test_sl_flips_signs_when_signal_below_constant(self):
        inputs = make_inputs(50, 10, w=1.0)
        base = np.array([1.0, -2.0, 0.0, 3.0] + [0.0] * 6)
        out = sl.shrink(make_fit(base), sl.ShrinkageVariant.SL, inputs)
        assert out.factor < 0
        nz = base != 0
        assert np.all(np.sign(out.slopes[nz]) == -np.sign(base[nz]))

    def test_prsl_equals_sl_when_signal_dominates(self):
        rng = np.random.default_rng(53)
        for _ in range(50):
            n, p = 50, 10
            a = sl.stein_constant(n, p)
            w = float(rng.uniform(a, 50 * a))
            fit = make_fit(rng.standard_normal(p) * (rng.random(p) < 0.7))
            inputs = make_inputs(n, p, w)
            s1 = sl.shrink(fit, sl.ShrinkageVariant.SL, inputs)
            s2 = sl.shrink(fit, sl.ShrinkageVariant.PRSL, inputs)
            assert np.array_equal(s1.slopes, s2.slopes)

    def test_componentwise_scaling_is_exact(self):
        rng = np.random.default_rng(54)
        for _ in range(50):
            n, p = int(rng.integers(20, 80)), int(rng.integers(3, 12))
            if n <= p:
                continue
            w = float(rng.uniform(0.01, 100.0))
            fit = make_fit(rng.standard_normal(p) * (rng.random(p) < 0.6))
            inputs = make_inputs(n, p, w)
            for variant in VARIANTS:
                out = sl.shrink(fit, variant, inputs)
                assert np.array_equal(out.slopes, out.factor * fit.slopes)
                # support preservation, with equality when the factor is nonzero
                assert np.all(out.slopes[fit.slopes == 0.0] == 0.0)
                if out.factor != 0.0:
                    assert np.array_equal(out.slopes != 0.0, fit.slopes != 0.0)

    def test_factor_ordering_sl_below_sl2_below_one(self):
        rng = np.random.default_rng(55)
        for _ in range(100):
            n, p = 50, 10
            a = sl.stein_constant(n, p)
            w = float(rng.uniform(1e-6, 1e3))
            f_sl, _ = sl.shrinkage_factor(sl.ShrinkageVariant.SL, a, w)
            f_sl2, _ = sl.shrinkage_factor(sl.ShrinkageVariant.SL2, a, w)
            assert f_sl < f_sl2 < 1.0

    def test_degenerate_zero_signal(self):
        inputs = make_inputs(50, 10, w=0.0)
        fit = make_fit(np.zeros(10))
        for variant in VARIANTS:
            out = sl.shrink(fit, variant, inputs)
            if variant is sl.ShrinkageVariant.SL2:
                assert not out.degenerate
                assert out.factor == 1.0 - inputs.a
            else:
                assert out.degenerate
                assert out.factor == 0.0
                assert np.array_equal(out.slopes, np.zeros(10))

    def test_log_variant_expands_for_small_signal(self):
        inputs = make_inputs(50, 10, w=0.5)  # log(0.5) < 0 makes the factor exceed 1
        out = sl.shrink(make_fit(np.ones(10)), sl.ShrinkageVariant.SL3_LOG, inputs)
        assert out.factor > 1.0
        assert out.expanded

    def test_inputs_validate_constant(self):
        with pytest.raises(DataError, match="dimension constant"):
            sl.SteinInputs(a=1.23, w=1.0, sigma2=1.0, n=50, p=10)


class TestSteinConditionValue:
    def test_zero_constant_gives_zero(self):
        G = np.eye(5)
        assert sl.stein_condition_value(np.ones(5), G, 1.0, a=0.0) == 0.0

    def test_matches_analytic_divergence_oracle(self):
        # oracle derived by direct differentiation:
        #   value = a^2 s^4 ||b||^2 / (b'Gb)^2 - 2 a s^2 (p-2) / (b'Gb)
        rng = np.random.default_rng(56)
        for _ in range(30):
            p = 10
            A = rng.standard_normal((50, p))
            A -= A.mean(axis=0)
            G = A.T @ A
            b = rng.standard_normal(p)
            sigma2 = float(rng.uniform(0.3, 2.0))
            a = sl.stein_constant(50, p)
            q = float(b @ (G @ b))
            analytic = a**2 * sigma2**2 * float(b @ b) / q**2 - 2 * a * sigma2 * (p - 2) / q
            fd = sl.stein_condition_value(b, G, sigma2, a)
            assert fd == pytest.approx(analytic, rel=1e-4)

    def test_negative_at_strong_signal_fits(self):
        rng = np.random.default_rng(57)
        negatives = 0
        total = 0
        for _ in range(100):
            p = 10
            A = rng.standard_normal((50, p))
            A -= A.mean(axis=0)
            G = A.T @ A
            sigma2 = float(rng.uniform(0.3, 2.0))
            a = sl.stein_constant(50, p)
            b = rng.standard_normal(p)
            w = float(b @ (G @ b)) / sigma2
            if w <= 2 * a:
                continue
            total += 1
            if sl.stein_condition_value(b, G, sigma2, a) < 0:
                negatives += 1
        assert total >= 80
        assert negatives >= 0.99 * total

    def test_zero_fit_rejected(self):
        with pytest.raises(DataError, match="all-zero"):
            sl.stein_condition_value(np.zeros(4), np.eye(4), 1.0, a=1.0)


class TestMonteCarloRiskOrdering:
    def test_prsl_never_worse_than_sl_at_monte_carlo_level(self):
        # empirical form of the positive-part dominance, small scale; the
        # acceptance suite runs the full 2000-replication version
        rng_beta = sl.decaying_coefficients(10, 0.5, sl.signal_scale_from_r2(0.2))
        for beta in (np.zeros(10), rng_beta):
            losses, _ = sl.replication_losses(
                50, beta, ("sl", "prsl"), replications=400, seed=99
            )
            diff = losses["prsl"] - losses["sl"]
            margin = 2 * diff.std(ddof=1) / np.sqrt(diff.size)
            assert diff.mean() <= margin
