"""Quantile factor estimation by alternating quantile regressions.

The model for a complete residual panel E (T x N) at quantile level tau is a
rank-r product F @ G' minimizing mean check loss, under the normalizations
(1/T) F'F = I_r and (1/N) G'G diagonal with non-increasing diagonal.

For r = 1 (the production configuration) both alternating subproblems are
one-regressor quantile regressions with a shared design, solved exactly and
vectorized; the objective is then non-increasing by construction.  For r > 1
each subproblem falls back to the general IRLS solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ciqlab.errors import DimensionError, DomainError
from ciqlab.numerics import mean_check_loss, quantile_regression, solve_scalar_quantile
from ciqlab.numerics.pca import pca

__all__ = ["QfaFit", "ResidualPanel", "RollingFactorSeries", "estimate_qfa", "splice_factor"]


@dataclass
class ResidualPanel:
    """Complete-case panel of idiosyncratic residuals, dates by assets."""

    dates: list[str]
    assets: list[str]
    values: np.ndarray  # (T, N)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.dates), len(self.assets)):
            raise DimensionError("panel shape does not match date/asset labels")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("residual panel must be complete and finite")


@dataclass
class QfaFit:
    tau: float
    factors: np.ndarray    # (T, r)
    loadings: np.ndarray   # (N, r)
    objective: float
    iterations: int
    converged: bool
    objective_path: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def fitted(self) -> np.ndarray:
        return self.factors @ self.loadings.T


@dataclass
class RollingFactorSeries:
    key: str              # formatted tau or "PCASQ"
    dates: list[str]      # window-end months, one per level
    levels: np.ndarray
    diffs: np.ndarray     # first difference; first observation dropped

    @property
    def diff_dates(self) -> list[str]:
        return self.dates[1:]


def _normalize(F: np.ndarray, G: np.ndarray):
    """Rotate to (1/T) F'F = I and (1/N) G'G diagonal non-increasing.

    The rotation is absorbed into the loadings so fitted values F @ G' are
    unchanged.  For r = 1 this is a rescale plus a sign flip toward
    nonnegative loading mean.
    """
    T = F.shape[0]
    r = F.shape[1]
    gram = F.T @ F / T
    L = np.linalg.cholesky(gram)
    F = F @ np.linalg.inv(L).T
    G = G @ L
    if r > 1:
        B = G.T @ G / G.shape[0]
        vals, Q = np.linalg.eigh(B)
        order = np.argsort(vals)[::-1]
        Q = Q[:, order]
        F = F @ Q
        G = G @ Q
    for j in range(F.shape[1]):
        mean_load = G[:, j].mean()
        if mean_load < 0.0 or (mean_load == 0.0 and G[0, j] < 0.0):
            F[:, j] = -F[:, j]
            G[:, j] = -G[:, j]
    return F, G


def _init_factors(E: np.ndarray, tau: float, r: int, init: str) -> np.ndarray:
    T = E.shape[0]
    if init == "quantile":
        # cross-sectional tau-quantile per date seeds the scale structure;
        # higher components start from principal component scores
        f0 = np.quantile(E, tau, axis=1)
        F = f0[:, None] if r == 1 else np.c_[f0, pca(E, r - 1).scores]
    elif init == "pca":
        F = pca(E, r).scores
    else:
        raise DomainError(f"unknown init strategy {init!r} (use 'quantile' or 'pca')")
    norms = np.sqrt(np.mean(F * F, axis=0))
    norms = np.where(norms > 0.0, norms, 1.0)
    return F / norms


def estimate_qfa(
    panel: ResidualPanel | np.ndarray,
    tau: float,
    r: int = 1,
    init: str = "quantile",
    max_outer: int = 100,
    tol: float = 1e-8,
) -> QfaFit:
    """Estimate quantile factors and loadings at level ``tau``.

    Alternates exact (r = 1) or IRLS (r > 1) quantile regressions: first each
    asset's loading row given the factors, then each date's factor row given
    the loadings, renormalizing after every sweep.  Stops when the mean check
    loss improves by less than ``tol`` relative, or after ``max_outer``
    sweeps.  A sweep that fails to improve the objective (possible only in
    the approximate r > 1 path) is rolled back and iteration stops.

    The default initialization is the per-date cross-sectional tau-quantile
    of the panel, which seeds scale-type factor structures reliably;
    ``init="pca"`` starts from principal component scores instead.
    """
    E = panel.values if isinstance(panel, ResidualPanel) else np.asarray(panel, dtype=float)
    if E.ndim != 2:
        raise DimensionError("panel must be a 2-d array, dates by assets")
    T, N = E.shape
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie strictly inside (0, 1), got {tau}")
    r = int(r)
    if r < 1:
        raise DomainError("factor count must be >= 1")
    if r >= min(N, T):
        raise DimensionError(f"factor count {r} must be below min(N, T) = {min(N, T)}")

    if np.all(E == 0.0):
        # degenerate optimum: zero loadings fit exactly; factors are
        # arbitrary up to normalization, returned as a normalized basis
        F = np.zeros((T, r))
        F[:r, :r] = np.eye(r) * np.sqrt(T)
        return QfaFit(tau, F, np.zeros((N, r)), 0.0, 0, True, np.zeros(1))

    if np.any(E.std(axis=0) == 0.0):
        raise DomainError("degenerate panel: at least one asset has zero variance")

    F = _init_factors(E, tau, r, init)
    G = np.zeros((N, r))
    prev_obj = np.inf
    prev_state = None
    path = []
    converged = False
    iterations = 0
    for iterations in range(1, max_outer + 1):
        if r == 1:
            G = solve_scalar_quantile(E, F[:, 0], tau)[:, None]
            if np.any(G != 0.0):
                F = solve_scalar_quantile(E.T, G[:, 0], tau)[:, None]
        else:
            for i in range(N):
                G[i] = quantile_regression(F, E[:, i], tau, max_iter=60).coefficients
            if np.any(G != 0.0):
                for t in range(T):
                    F[t] = quantile_regression(G, E[t, :], tau, max_iter=60).coefficients
        F, G = _normalize(F, G)
        obj = mean_check_loss(E - F @ G.T, tau)
        if obj > prev_obj * (1.0 + 1e-12) + 1e-15:
            F, G, obj = prev_state  # roll back the non-improving sweep
            converged = True
            break
        path.append(obj)
        if prev_obj - obj < tol * max(abs(prev_obj), 1e-12):
            converged = True
            break
        prev_obj = obj
        prev_state = (F.copy(), G.copy(), obj)
    return QfaFit(tau, F, G, float(path[-1]), iterations, converged, np.asarray(path))


def align_factor_signs(fits: Sequence[QfaFit], step: int = 1) -> list[QfaFit]:
    """Flip successive window fits so overlapping factor stretches agree.

    Windows are assumed ordered by end date with a fixed step between
    consecutive starts; the overlap of window w and w+1 covers all but
    ``step`` observations.  Only r = 1 fits are aligned.
    """
    aligned: list[QfaFit] = []
    for fit in fits:
        if aligned and fit.factors.shape[1] == 1:
            prev = aligned[-1]
            a = prev.factors[step:, 0]
            b = fit.factors[: fit.factors.shape[0] - step, 0]
            k = min(len(a), len(b))
            if k >= 2:
                a, b = a[-k:], b[-k:]
                cov = float(np.dot(a - a.mean(), b - b.mean()))
                if cov < 0.0:
                    fit = QfaFit(
                        fit.tau,
                        -fit.factors,
                        -fit.loadings,
                        fit.objective,
                        fit.iterations,
                        fit.converged,
                        fit.objective_path,
                    )
        aligned.append(fit)
    return aligned


def splice_factor(
    windows: Sequence[QfaFit],
    end_dates: Sequence[str],
    key: str | None = None,
) -> RollingFactorSeries:
    """Assemble one factor series from rolling-window fits.

    Levels take the final factor observation of each window; the diff series
    is the first difference of the levels with the first observation dropped.
    """
    windows = list(windows)
    if not windows:
        raise DomainError("cannot splice an empty window sequence")
    if len(windows) != len(end_dates):
        raise DimensionError("one end date per window is required")
    if any(w.factors.shape[1] != 1 for w in windows):
        raise DimensionError("splicing expects single-factor fits")
    levels = np.array([w.factors[-1, 0] for w in windows])
    if key is None:
        key = format_tau(windows[0].tau)
    return RollingFactorSeries(key, list(end_dates), levels, np.diff(levels))


def format_tau(tau: float) -> str:
    return format(float(tau), "g")
