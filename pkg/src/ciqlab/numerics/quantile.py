"""Check-loss quantile regression.

Two solvers live here:

* :func:`solve_scalar_quantile` — exact minimizer for one-regressor problems
  (shared design, many responses), found by scanning the subgradient over the
  breakpoints ``y_i / x_i``.  This is the workhorse of the alternating factor
  estimation, where every subproblem has a single regressor.
* :func:`quantile_regression` — general p-regressor solver: iteratively
  reweighted least squares on an annealed smoothing of the check function,
  followed by a vertex polish that re-solves the interpolation system of the
  near-active points.  Single-regressor problems are routed to the exact path.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ciqlab.errors import DimensionError, DomainError, SingularityError

__all__ = [
    "QuantileFitResult",
    "check_loss",
    "monotone_rearrange",
    "quantile_regression",
    "solve_scalar_quantile",
]


@dataclass
class QuantileFitResult:
    coefficients: np.ndarray
    tau: float
    objective: float
    iterations: int
    converged: bool


def _validate_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie strictly inside (0, 1), got {tau}")
    return tau


def check_loss(u, tau):
    """Asymmetric absolute loss ``(tau - 1{u <= 0}) * u``.

    Piecewise linear with slope ``tau`` for positive arguments and
    ``tau - 1`` for non-positive ones; nonnegative everywhere and zero only
    at ``u = 0``.
    """
    tau = _validate_tau(tau)
    u = np.asarray(u, dtype=float)
    return (tau - (u <= 0.0)) * u


def mean_check_loss(residuals, tau) -> float:
    return float(np.mean(check_loss(residuals, tau)))


def solve_scalar_quantile(Y: np.ndarray, x: np.ndarray, tau: float) -> np.ndarray:
    """Exactly minimize ``sum_i rho_tau(Y[i, j] - b * x[i])`` over b, per column.

    The objective is piecewise linear and convex in b with knots at
    ``Y[i, j] / x[i]``; the minimizer is the first knot (in sorted order) at
    which the cumulative subgradient turns nonnegative.  Entries with
    ``x[i] == 0`` contribute a constant and are ignored.  Columns where every
    regressor entry is zero get coefficient 0.
    """
    tau = _validate_tau(tau)
    x = np.asarray(x, dtype=float)
    Y = np.asarray(Y, dtype=float)
    squeeze = Y.ndim == 1
    if squeeze:
        Y = Y[:, None]
    if Y.shape[0] != x.shape[0]:
        raise DimensionError("response and regressor lengths differ")

    active = x != 0.0
    if not np.any(active):
        out = np.zeros(Y.shape[1])
        return out[0] if squeeze else out

    xa = x[active]
    w = np.abs(xa)
    knots = Y[active] / xa[:, None]
    # Subgradient at -inf; each knot crossing adds |x_i| regardless of sign.
    g0 = -(tau * w[xa > 0.0].sum() + (1.0 - tau) * w[xa < 0.0].sum())
    order = np.argsort(knots, axis=0, kind="stable")
    knots_sorted = np.take_along_axis(knots, order, axis=0)
    cum = np.cumsum(w[order.ravel()].reshape(order.shape), axis=0)
    idx = np.argmax(cum >= -g0, axis=0)
    beta = knots_sorted[idx, np.arange(Y.shape[1])]
    return beta[0] if squeeze else beta


def _vertex_polish(X, y, tau, beta, objective, max_subsets=300):
    """Try interpolation vertices built from the smallest-residual points."""
    n, p = X.shape
    resid = np.abs(y - X @ beta)
    cand = np.argsort(resid, kind="stable")[: min(n, 2 * p + 2)]
    tried = 0
    for subset in combinations(cand.tolist(), p):
        tried += 1
        if tried > max_subsets:
            break
        A = X[list(subset)]
        try:
            b = np.linalg.solve(A, y[list(subset)])
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(b)):
            continue
        obj = mean_check_loss(y - X @ b, tau)
        if obj < objective:
            objective, beta = obj, b
    return beta, objective


def quantile_regression(
    X: np.ndarray,
    y: np.ndarray,
    tau: float,
    max_iter: int = 200,
    tol: float = 1e-8,
) -> QuantileFitResult:
    """Minimize mean check loss of ``y - X @ beta``.

    IRLS on the damped absolute loss: weights ``|tau - 1{r<=0}| / max(|r|, d)``
    with the damping ``d`` annealed toward zero once the objective stalls at
    the current smoothing level.  The best iterate is polished by exact
    interpolation through the near-active points, so on small problems the
    returned objective matches the linear-programming optimum.
    """
    tau = _validate_tau(tau)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if y.shape[0] != n:
        raise DimensionError(f"len(y)={y.shape[0]} does not match rows(X)={n}")
    if n < p:
        raise DimensionError(f"need at least as many observations ({n}) as regressors ({p})")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DomainError("non-finite values in regression inputs")
    if np.linalg.matrix_rank(X) < p:
        raise SingularityError("design matrix is rank deficient")

    if p == 1:
        beta = np.array([solve_scalar_quantile(y, X[:, 0], tau)])
        obj = mean_check_loss(y - X @ beta, tau)
        return QuantileFitResult(beta, tau, obj, 1, True)

    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    scale = max(float(np.std(y)), float(np.max(np.abs(y))) * 1e-3, 1e-12)
    damp = 1e-2 * scale
    damp_floor = 1e-11 * scale
    best_obj = mean_check_loss(y - X @ beta, tau)
    best_beta = beta.copy()
    prev = best_obj
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        r = y - X @ beta
        w = np.where(r > 0.0, tau, 1.0 - tau) / np.maximum(np.abs(r), damp)
        sw = np.sqrt(w)
        beta = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)[0]
        obj = mean_check_loss(y - X @ beta, tau)
        if obj < best_obj:
            best_obj, best_beta = obj, beta.copy()
        if abs(prev - obj) <= tol * max(abs(prev), 1e-12):
            if damp <= damp_floor:
                converged = True
                break
            damp = max(damp / 10.0, damp_floor)
        prev = obj
    best_beta, best_obj = _vertex_polish(X, y, tau, best_beta, best_obj)
    return QuantileFitResult(best_beta, tau, best_obj, iterations, converged)


def monotone_rearrange(values) -> np.ndarray:
    """Monotone rearrangement of a quantile curve: sort the values.

    Idempotent, preserves the multiset of values, and repairs any
    quantile crossing along a tau grid.
    """
    return np.sort(np.asarray(values, dtype=float), kind="stable")
