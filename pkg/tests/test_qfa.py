import numpy as np
import pytest
from scipy import stats

from ciqlab.errors import DimensionError, DomainError
from ciqlab.numerics import mean_check_loss
from ciqlab.qfa import (
    QfaFit,
    ResidualPanel,
    align_factor_signs,
    estimate_qfa,
    splice_factor,
)


def location_scale_panel(rng, n_assets=200, n_dates=200, df=3.0):
    """sigma_i * v_t * z_it with heavy-tailed z and a persistent positive v."""
    sig = rng.uniform(0.5, 1.5, n_assets)
    log_v = np.zeros(n_dates)
    for t in range(1, n_dates):
        log_v[t] = 0.95 * log_v[t - 1] + 0.3 * rng.standard_normal()
    v = np.exp(log_v)
    z = rng.standard_t(df, (n_dates, n_assets))
    return sig[None, :] * v[:, None] * z, v


def cubic_panel(rng, n_assets=500, n_dates=200):
    """f2 * eps + f3 * eps^3: the quantile factor is f2 + f3 * Phi^-1(tau)^2."""
    f2 = rng.uniform(0.2, 2.2, n_dates)
    f3 = rng.uniform(0.05, 0.85, n_dates)
    eps = rng.standard_normal((n_dates, n_assets))
    return f2[:, None] * eps + f3[:, None] * eps**3, f2, f3


def check_normalization(fit: QfaFit):
    T = fit.factors.shape[0]
    N = fit.loadings.shape[0]
    gram_f = fit.factors.T @ fit.factors / T
    assert np.allclose(gram_f, np.eye(fit.factors.shape[1]), atol=1e-6)
    gram_g = fit.loadings.T @ fit.loadings / N
    off = gram_g - np.diag(np.diag(gram_g))
    assert np.max(np.abs(off)) < 1e-6
    d = np.diag(gram_g)
    assert np.all(np.diff(d) <= 1e-6)


class TestEstimateQfa:
    def test_location_scale_recovery(self):
        rng = np.random.default_rng(1000)
        panel, v = location_scale_panel(rng)
        target = v * stats.t.ppf(0.1, 3.0)
        fit = estimate_qfa(panel, 0.1)
        corr = np.corrcoef(fit.factors[:, 0], target)[0, 1]
        assert abs(corr) > 0.95
        check_normalization(fit)

    def test_cubic_quantile_dependence(self):
        rng = np.random.default_rng(2000)
        panel, f2, f3 = cubic_panel(rng)
        fits = {}
        for tau in (0.1, 0.25):
            target = f2 + f3 * stats.norm.ppf(tau) ** 2
            fit = estimate_qfa(panel, tau)
            assert abs(np.corrcoef(fit.factors[:, 0], target)[0, 1]) > 0.9
            fits[tau] = fit
        cross = np.corrcoef(fits[0.1].factors[:, 0], fits[0.25].factors[:, 0])[0, 1]
        assert abs(cross) < 0.99

    def test_all_zero_panel(self):
        fit = estimate_qfa(np.zeros((30, 10)), 0.3)
        assert np.all(fit.loadings == 0.0)
        assert fit.objective == 0.0
        assert np.allclose(fit.factors.T @ fit.factors / 30, np.eye(1), atol=1e-12)

    def test_zero_variance_column_rejected(self):
        rng = np.random.default_rng(3)
        panel = rng.standard_normal((40, 6))
        panel[:, 2] = 1.5
        with pytest.raises(DomainError):
            estimate_qfa(panel, 0.5)

    def test_dimension_errors(self):
        panel = np.random.default_rng(4).standard_normal((20, 5))
        with pytest.raises(DimensionError):
            estimate_qfa(panel, 0.5, r=5)
        with pytest.raises(DomainError):
            estimate_qfa(panel, 1.2)

    def test_objective_monotone_along_path(self):
        rng = np.random.default_rng(5)
        panel, _ = location_scale_panel(rng, n_assets=60, n_dates=80)
        fit = estimate_qfa(panel, 0.25)
        path = fit.objective_path
        assert np.all(np.diff(path) <= 1e-10)
        assert fit.objective == pytest.approx(
            mean_check_loss(panel - fit.fitted, 0.25), rel=1e-12
        )

    def test_asset_permutation_permutes_loadings_only(self):
        rng = np.random.default_rng(6)
        panel, _ = location_scale_panel(rng, n_assets=50, n_dates=60)
        perm = rng.permutation(50)
        base = estimate_qfa(panel, 0.2)
        shuffled = estimate_qfa(panel[:, perm], 0.2)
        sign = np.sign(np.dot(base.factors[:, 0], shuffled.factors[:, 0]))
        assert shuffled.factors[:, 0] * sign == pytest.approx(base.factors[:, 0], abs=1e-8)
        assert shuffled.loadings[:, 0] * sign == pytest.approx(base.loadings[perm, 0], abs=1e-8)

    def test_panel_scaling_moves_loadings_not_factors(self):
        rng = np.random.default_rng(7)
        panel, _ = location_scale_panel(rng, n_assets=50, n_dates=60)
        base = estimate_qfa(panel, 0.2)
        scaled = estimate_qfa(3.0 * panel, 0.2)
        sign = np.sign(np.dot(base.factors[:, 0], scaled.factors[:, 0]))
        assert scaled.factors[:, 0] * sign == pytest.approx(base.factors[:, 0], abs=1e-8)
        assert scaled.loadings[:, 0] * sign == pytest.approx(3.0 * base.loadings[:, 0], abs=1e-8)

    def test_pure_location_shift_no_spurious_quantile_dependence(self):
        rng = np.random.default_rng(8)
        n_dates, n_assets = 150, 150
        mu = rng.standard_normal(n_dates)
        lam = rng.uniform(0.5, 1.5, n_assets)
        panel = lam[None, :] * mu[:, None] + rng.standard_normal((n_dates, n_assets))
        f25 = estimate_qfa(panel, 0.25).factors[:, 0]
        f75 = estimate_qfa(panel, 0.75).factors[:, 0]
        assert abs(np.corrcoef(f25, f75)[0, 1]) > 0.9

    def test_residual_panel_wrapper(self):
        rng = np.random.default_rng(9)
        values = rng.standard_normal((12, 4))
        panel = ResidualPanel(
            dates=[f"200{i//12}-{i%12+1:02d}" for i in range(12)],
            assets=list("abcd"),
            values=values,
        )
        fit = estimate_qfa(panel, 0.5)
        assert fit.factors.shape == (12, 1)

    def test_r2_normalization_holds(self):
        rng = np.random.default_rng(10)
        f1 = rng.standard_normal(80)
        f2 = rng.standard_normal(80)
        g1 = rng.uniform(1.0, 2.0, 40)
        g2 = rng.uniform(-1.0, 1.0, 40)
        panel = np.outer(f1, g1) + np.outer(f2, g2) + 0.1 * rng.standard_normal((80, 40))
        fit = estimate_qfa(panel, 0.5, r=2, max_outer=20)
        check_normalization(fit)


class TestSplice:
    def _fit(self, series, tau=0.1):
        f = np.asarray(series, dtype=float)[:, None]
        return QfaFit(tau, f, np.ones((3, 1)), 0.0, 1, True)

    def test_levels_and_diffs(self):
        fits = [self._fit([0.0, 0.5]), self._fit([0.1, 0.7]), self._fit([0.2, 0.4])]
        out = splice_factor(fits, ["2001-01", "2001-02", "2001-03"])
        assert out.levels == pytest.approx([0.5, 0.7, 0.4])
        assert out.diffs == pytest.approx([0.2, -0.3])
        assert out.diff_dates == ["2001-02", "2001-03"]

    def test_single_window(self):
        out = splice_factor([self._fit([1.0, 2.0])], ["2001-01"])
        assert out.levels == pytest.approx([2.0])
        assert out.diffs.size == 0

    def test_empty_raises(self):
        with pytest.raises(DomainError):
            splice_factor([], [])

    def test_sign_alignment_repairs_flips(self):
        rng = np.random.default_rng(11)
        base = np.cumsum(rng.standard_normal(40)) + 10
        w1 = self._fit(base[:30])
        w2 = self._fit(-base[1:31])  # artificially flipped window
        aligned = align_factor_signs([w1, w2])
        overlap_corr = np.corrcoef(aligned[0].factors[1:, 0], aligned[1].factors[:-1, 0])[0, 1]
        assert overlap_corr > 0.99

    def test_spliced_windows_overlap_positively_on_simulation(self):
        rng = np.random.default_rng(12)
        panel, _ = location_scale_panel(rng, n_assets=80, n_dates=90)
        length = 60
        fits, ends = [], []
        for start in range(0, 90 - length + 1, 1):
            window = panel[start : start + length]
            fits.append(estimate_qfa(window, 0.1))
            ends.append(f"w{start}")
        fits = align_factor_signs(fits)
        for a, b in zip(fits, fits[1:]):
            corr = np.corrcoef(a.factors[1:, 0], b.factors[:-1, 0])[0, 1]
            assert corr > 0.0
        out = splice_factor(fits, ends)
        assert len(out.levels) == len(fits)
        assert len(out.diffs) == len(fits) - 1
