"""Least squares and Newey-West (Bartlett kernel) HAC inference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ciqlab.errors import DimensionError, DomainError, SingularityError

__all__ = ["HacResult", "newey_west", "ols"]


@dataclass
class HacResult:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    lags: int
    degenerate: bool = False


def _as_design(X: np.ndarray, y: np.ndarray):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if y.shape[0] != n:
        raise DimensionError(f"len(y)={y.shape[0]} does not match rows(X)={n}")
    if n < p:
        raise DimensionError("fewer observations than regressors")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DomainError("non-finite values in regression inputs")
    return X, y, n, p


def ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares coefficients; raises on rank-deficient designs."""
    X, y, n, p = _as_design(X, y)
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < p:
        raise SingularityError("design matrix is rank deficient")
    return coef


def newey_west(X: np.ndarray, y: np.ndarray, lags: int = 6) -> HacResult:
    """OLS with Bartlett-kernel HAC standard errors.

    Weights are ``1 - l / (lags + 1)``; ``lags=0`` reduces to the White
    heteroskedasticity-robust (HC0) covariance.  A response with zero
    variance yields the exact constant fit with zero standard errors and a
    ``degenerate`` flag; t-stats are reported as 0 there rather than 0/0.
    """
    X, y, n, p = _as_design(X, y)
    lags = int(lags)
    if lags < 0:
        raise DomainError("lags must be nonnegative")
    if lags >= n:
        raise DomainError(f"lags={lags} must be smaller than the sample size {n}")
    if np.linalg.matrix_rank(X) < p:
        raise SingularityError("design matrix is rank deficient")

    if np.ptp(y) == 0.0:
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        zeros = np.zeros(p)
        return HacResult(coef, zeros.copy(), zeros.copy(), lags, degenerate=True)

    XtX_inv = np.linalg.inv(X.T @ X)
    coef = XtX_inv @ (X.T @ y)
    u = y - X @ coef
    xu = X * u[:, None]
    S = xu.T @ xu
    for lag in range(1, lags + 1):
        w = 1.0 - lag / (lags + 1.0)
        gamma = xu[lag:].T @ xu[:-lag]
        S += w * (gamma + gamma.T)
    cov = XtX_inv @ S @ XtX_inv
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    t = np.divide(coef, se, out=np.zeros_like(coef), where=se > 0.0)
    return HacResult(coef, se, t, lags)
