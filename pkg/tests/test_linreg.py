import numpy as np
import pytest

from ciqlab.errors import DomainError, SingularityError
from ciqlab.numerics import newey_west, ols

from oracles import ols_qr_solve, white_standard_errors


class TestOls:
    def test_intercept_only_constant(self):
        assert ols(np.ones((3, 1)), np.array([3.0, 3.0, 3.0]))[0] == pytest.approx(3.0)

    def test_exact_interpolation(self):
        X = np.array([[1.0, 0.0], [1.0, 1.0]])
        coef = ols(X, np.array([0.0, 2.0]))
        assert coef == pytest.approx([0.0, 2.0])

    def test_matches_qr_oracle(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((20, 3))
        y = rng.standard_normal(20)
        assert ols(X, y) == pytest.approx(ols_qr_solve(X, y), abs=1e-8)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(1)
        X = np.c_[np.ones(50), rng.standard_normal((50, 3))]
        y = rng.standard_normal(50)
        resid = y - X @ ols(X, y)
        assert np.max(np.abs(X.T @ resid)) < 1e-10 * max(1.0, np.abs(X.T @ y).max())

    def test_rank_deficiency(self):
        X = np.c_[np.ones(6), 2 * np.ones(6)]
        with pytest.raises(SingularityError):
            ols(X, np.arange(6.0))


class TestNeweyWest:
    def test_zero_lags_equals_white_oracle(self):
        rng = np.random.default_rng(2)
        X = np.c_[np.ones(40), rng.standard_normal((40, 2))]
        y = X @ np.array([0.2, 1.0, -0.5]) + rng.standard_normal(40) * rng.uniform(0.5, 2.0, 40)
        res = newey_west(X, y, lags=0)
        beta, se = white_standard_errors(X, y)
        assert res.coefficients == pytest.approx(beta, rel=1e-12)
        assert res.standard_errors == pytest.approx(se, abs=1e-10)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(3)
        X = np.c_[np.ones(60), rng.standard_normal(60)]
        y = X @ np.array([0.1, 0.7]) + rng.standard_normal(60)
        base = newey_west(X, y, lags=4)
        X2 = X.copy()
        X2[:, 1] *= 5.0
        scaled = newey_west(X2, y, lags=4)
        assert scaled.coefficients[1] == pytest.approx(base.coefficients[1] / 5.0)
        assert scaled.t_stats[1] == pytest.approx(base.t_stats[1], rel=1e-10)

    def test_t_equals_coef_over_se(self):
        rng = np.random.default_rng(4)
        X = np.c_[np.ones(30), rng.standard_normal(30)]
        y = rng.standard_normal(30)
        res = newey_west(X, y, lags=6)
        assert res.t_stats == pytest.approx(res.coefficients / res.standard_errors)

    def test_monte_carlo_size_of_noise_regressor(self):
        # Pure-noise regressor: |t| should stay within +-3 nearly always.
        hits = 0
        n_seeds = 40
        for seed in range(n_seeds):
            rng = np.random.default_rng(100 + seed)
            x = rng.standard_normal(5000)
            y = rng.standard_normal(5000)
            res = newey_west(np.c_[np.ones(5000), x], y, lags=6)
            hits += abs(res.t_stats[1]) < 3.0
        assert hits >= n_seeds - 1

    def test_lag_bounds(self):
        X = np.ones((5, 1))
        y = np.arange(5.0)
        with pytest.raises(DomainError):
            newey_west(X, y, lags=5)
        with pytest.raises(DomainError):
            newey_west(X, y, lags=-1)

    def test_degenerate_response(self):
        X = np.c_[np.ones(10), np.arange(10.0)]
        res = newey_west(X, np.full(10, 2.5), lags=2)
        assert res.degenerate
        assert res.coefficients[0] == pytest.approx(2.5)
        assert res.coefficients[1] == pytest.approx(0.0, abs=1e-12)
        assert np.all(res.standard_errors == 0.0)
        assert np.all(res.t_stats == 0.0)
