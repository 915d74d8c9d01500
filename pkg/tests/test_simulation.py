import numpy as np
import pytest

import steinlasso as sl
from steinlasso.simulation import TABLE_HEADER
from steinlasso.tables import read_table, write_table


class TestSignalScale:
    def test_zero(self):
        assert sl.signal_scale_from_r2(0.0) == 0.0

    def test_half_maps_to_one(self):
        assert sl.signal_scale_from_r2(0.5) == pytest.approx(1.0, rel=1e-15)

    def test_point_eight_maps_to_two(self):
        assert sl.signal_scale_from_r2(0.8) == pytest.approx(2.0, rel=1e-12)

    def test_rejects_r2_at_or_above_one(self):
        with pytest.raises(ValueError):
            sl.signal_scale_from_r2(1.0)


class TestDecayingCoefficients:
    def test_zero_scale_gives_zero_vector(self):
        assert np.array_equal(sl.decaying_coefficients(5, 0.5, 0.0), np.zeros(5))

    def test_first_coefficient_alpha_one(self):
        beta = sl.decaying_coefficients(3, 1.0, 1.0)
        assert beta[0] == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_two_coefficients_alpha_half(self):
        beta = sl.decaying_coefficients(2, 0.5, 2.0)
        assert beta[0] == pytest.approx(2.0, rel=1e-15)
        assert beta[1] == pytest.approx(2.0 * 2.0 ** (-0.25), rel=1e-12)

    def test_strictly_decreasing_for_positive_scale(self):
        beta = sl.decaying_coefficients(10, 0.1, 1.5)
        assert np.all(np.diff(beta) < 0)


class TestGenerateReplication:
    def test_pure_noise_variance(self):
        rng = np.random.default_rng(60)
        d = sl.generate_replication(400, np.zeros(5), rng)
        assert abs(d.y.var() - 1.0) < 3 / np.sqrt(400) * np.sqrt(2)

    def test_fixed_seed_bit_identical(self):
        d1 = sl.generate_replication(30, np.ones(4), np.random.default_rng(7))
        d2 = sl.generate_replication(30, np.ones(4), np.random.default_rng(7))
        assert np.array_equal(d1.X, d2.X)
        assert np.array_equal(d1.y, d2.y)

    def test_empirical_r2_matches_population_relation(self):
        # large-sample oracle: R^2 of the true coefficients over 1e5 rows
        beta = sl.decaying_coefficients(8, 0.5, sl.signal_scale_from_r2(0.4))
        d = sl.generate_replication(100_000, beta, np.random.default_rng(61))
        resid = d.y - d.X @ beta
        r2 = 1.0 - resid.var() / d.y.var()
        expected = float(beta @ beta) / (1.0 + float(beta @ beta))
        assert abs(r2 - expected) < 0.01


class TestRunSimulation:
    def test_lasso_only_rmse_identically_one(self):
        cfg = sl.SimConfig(n=30, p=5, alpha=0.5, r2_max=0.5, grid_points=3,
                           replications=10, seed=3, estimators=("lasso",))
        res = sl.run_simulation(cfg)
        assert np.array_equal(res.rmse, np.ones((3, 1)))

    def test_deterministic_under_workers(self):
        cfg = sl.SimConfig(n=30, p=5, alpha=0.5, r2_max=0.5, grid_points=3,
                           replications=12, seed=4)
        serial = sl.run_simulation(cfg, workers=1)
        parallel = sl.run_simulation(cfg, workers=3)
        assert np.array_equal(serial.mse, parallel.mse)
        assert np.array_equal(serial.rmse, parallel.rmse)
        assert np.array_equal(serial.mc_se, parallel.mc_se)

    def test_mse_nonnegative_finite_with_se(self):
        cfg = sl.SimConfig(n=30, p=5, alpha=1.0, r2_max=0.4, grid_points=3,
                           replications=20, seed=5)
        res = sl.run_simulation(cfg)
        assert np.all(res.mse >= 0) and np.all(np.isfinite(res.mse))
        assert np.all(res.mc_se >= 0)
        assert res.metadata["config"]["seed"] == 5


class TestReplicationLosses:
    def test_zero_truth_prsl_beats_lasso_within_margin(self):
        losses, info = sl.replication_losses(50, np.zeros(10), ("prsl",), 300, seed=8)
        diff = losses["prsl"] - losses["lasso"]
        margin = 2 * diff.std(ddof=1) / np.sqrt(diff.size)
        assert diff.mean() <= margin
        assert info["nonconverged"] == 0

    def test_streams_independent_of_batching(self):
        one, _ = sl.replication_losses(30, np.ones(4), ("prsl",), 5, seed=9)
        again, _ = sl.replication_losses(30, np.ones(4), ("prsl",), 5, seed=9)
        assert np.array_equal(one["prsl"], again["prsl"])

    def test_fixed_lambda_rule(self):
        rule = sl.LambdaRule(mode="fixed", value=2.0)
        losses, info = sl.replication_losses(30, np.ones(4), ("sl2",), 5, seed=10,
                                             lambda_rule=rule)
        assert np.array_equal(info["selected_lambdas"], np.full(5, 2.0))


class TestExportTable:
    def _result(self, estimators):
        cfg = sl.SimConfig(n=30, p=5, alpha=0.5, r2_max=0.5, grid_points=3,
                           replications=5, seed=6, estimators=estimators)
        return sl.run_simulation(cfg)

    def test_row_count_is_grid_times_estimators(self):
        res = self._result(("lasso", "prsl"))
        assert len(sl.export_rmse_table(res)) == 3 * 2

    def test_empty_estimator_set_gives_no_rows(self):
        res = self._result(())
        assert sl.export_rmse_table(res) == []

    def test_file_round_trip_is_exact(self, tmp_path):
        res = self._result(("lasso", "prsl", "sl3-log"))
        rows = sl.export_rmse_table(res)
        path = write_table(tmp_path / "rmse.csv", TABLE_HEADER, rows)
        header, raw = read_table(path)
        assert tuple(header) == TABLE_HEADER
        assert len(raw) == len(rows)
        for orig, parsed in zip(rows, raw):
            assert float(parsed[0]) == orig[0]
            assert parsed[1] == orig[1]
            assert float(parsed[2]) == orig[2]
            assert float(parsed[3]) == orig[3]
            assert float(parsed[4]) == orig[4]
