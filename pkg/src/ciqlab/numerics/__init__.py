"""Foundational solvers: quantile regression, OLS/HAC, PCA, penalized fits."""

from ciqlab.numerics.linreg import HacResult, newey_west, ols
from ciqlab.numerics.pca import PcaResult, pca
from ciqlab.numerics.penalized import (
    RegularizedFit,
    coordinate_descent,
    lambda_grid,
    lambda_max,
    loo_cv_tune,
)
from ciqlab.numerics.quantile import (
    QuantileFitResult,
    check_loss,
    mean_check_loss,
    monotone_rearrange,
    quantile_regression,
    solve_scalar_quantile,
)

__all__ = [
    "HacResult",
    "PcaResult",
    "QuantileFitResult",
    "RegularizedFit",
    "check_loss",
    "coordinate_descent",
    "lambda_grid",
    "lambda_max",
    "loo_cv_tune",
    "mean_check_loss",
    "monotone_rearrange",
    "newey_west",
    "ols",
    "pca",
    "quantile_regression",
    "solve_scalar_quantile",
]
