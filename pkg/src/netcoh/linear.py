"""Linear regression with a network-cohesion penalty, plus baselines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, EstimatorNotExistError
from .graph import Graph, from_edge_list, laplacian
from .solvers import (DEFAULT_TOL, RNCSystem, SolveReport,
                      block_eliminate_fit, standardize)

__all__ = [
    "LinearFit",
    "fit_linear",
    "ols_fit",
    "null_model_fit",
    "fitted_values",
    "predict_response",
]


@dataclass(frozen=True)
class LinearFit:
    """Fitted individual effects and coefficients for the linear family.

    ``beta_hat`` is expressed on the internally standardized design;
    ``x_mean``/``x_scale`` are stored so new covariates can be mapped to
    the same scale at prediction time.
    """

    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    lam: float
    gamma: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    report: SolveReport
    family: str = "linear"


def _prepare(X, Y, n: int):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or X.shape[0] != n:
        raise DataError(f"X has shape {X.shape}, expected ({n}, p)")
    if Y.shape != (n,):
        raise DataError(f"Y has shape {Y.shape}, expected ({n},)")
    return standardize(X, return_params=True), Y


def fit_linear(X, Y, g: Graph, lam: float, gamma: float = 0.0,
               tol: float = DEFAULT_TOL) -> LinearFit:
    """Minimize ``||Y - X beta - alpha||^2 + lam * alpha'(L + gamma I)alpha``.

    The design is standardized internally; the centering and scaling are
    stored on the returned fit.  With ``gamma == 0`` on graphs violating
    the existence condition this raises :class:`EstimatorNotExistError`.
    """
    (Z, mean, scale), Y = _prepare(X, Y, g.n)
    sys = RNCSystem(L=laplacian(g, gamma), X=Z, lam=lam)
    alpha, beta, report = block_eliminate_fit(sys, Y, tol=tol)
    return LinearFit(alpha_hat=alpha, beta_hat=beta, lam=float(lam),
                     gamma=float(gamma), x_mean=mean, x_scale=scale,
                     report=report)


def ols_fit(X, Y) -> LinearFit:
    """Ordinary least squares with a single common intercept.

    ``beta = (X'X)^{-1} X'Y`` on the standardized design and
    ``alpha = ybar * 1``.
    """
    n = np.asarray(Y).shape[0]
    (Z, mean, scale), Y = _prepare(X, Y, n)
    gram = Z.T @ Z
    if np.linalg.matrix_rank(gram) < Z.shape[1]:
        raise DataError("X is rank deficient; OLS coefficients are not unique")
    beta = np.linalg.solve(gram, Z.T @ Y)
    alpha = np.full(n, Y.mean())
    return LinearFit(alpha_hat=alpha, beta_hat=beta, lam=0.0, gamma=0.0,
                     x_mean=mean, x_scale=scale,
                     report=SolveReport(0, 0.0, True), family="ols")


def null_model_fit(X, Y, lam: float, gamma: float = 1.0,
                   tol: float = DEFAULT_TOL) -> LinearFit:
    """Cohesion-free baseline: the fit on the empty graph (pure ridge)."""
    n = np.asarray(Y).shape[0]
    empty = from_edge_list([], n)
    return fit_linear(X, Y, empty, lam=lam, gamma=gamma, tol=tol)


def _rescale(fit: LinearFit, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != fit.beta_hat.shape[0]:
        raise DataError(f"X has shape {X.shape}, expected (*, {fit.beta_hat.shape[0]})")
    return (X - fit.x_mean) / fit.x_scale


def fitted_values(fit: LinearFit, X) -> np.ndarray:
    """``alpha_hat + X beta_hat`` on the fit's own nodes."""
    Z = _rescale(fit, X)
    if Z.shape[0] != fit.alpha_hat.shape[0]:
        raise DataError("X row count does not match the number of fitted nodes")
    return fit.alpha_hat + Z @ fit.beta_hat


def predict_response(fit: LinearFit, X_new, alpha_new) -> np.ndarray:
    """Linear predictor ``alpha_new + X_new beta_hat`` for new nodes."""
    Z = _rescale(fit, X_new)
    alpha_new = np.asarray(alpha_new, dtype=float)
    if Z.shape[0] != alpha_new.shape[0]:
        raise DataError("X_new and alpha_new disagree on the number of nodes")
    return alpha_new + Z @ fit.beta_hat
