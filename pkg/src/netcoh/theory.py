"""Finite-sample theory evaluators: existence, exact bias/MSE, bounds.

Everything here works on dense matrices and is meant for desk-scale
instances (n <= 5000): these are verification tools, not fitting paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, EstimatorNotExistError
from .graph import LaplacianMatrix

__all__ = [
    "TheoryReport",
    "assumption_nu",
    "rnc_bias",
    "rnc_exact_mse",
    "ols_exact_mse",
    "theorem1_bounds",
    "theory_report",
    "ols_comparison",
    "alpha_comparison_sigma_threshold",
    "beta_comparison_sigma_threshold",
    "sparsification_bound",
]

MAX_EIG_DIM = 5000


def _as_dense_laplacian(L) -> np.ndarray:
    if isinstance(L, LaplacianMatrix):
        return L.toarray()
    return np.asarray(L, dtype=float)


def _check_scale(n: int):
    if n > MAX_EIG_DIM:
        raise DataError(f"dense theory evaluators are guarded to n <= {MAX_EIG_DIM}")


def _projectors(X: np.ndarray):
    n = X.shape[0]
    gram = X.T @ X
    gram_inv = np.linalg.inv(gram)
    P = X @ gram_inv @ X.T
    return np.eye(n) - P, gram, gram_inv


def _full_matrices(X, L, lam):
    """(X~'X~ + lam M, X~'X~, M) as dense arrays."""
    n, p = X.shape
    Xt = np.concatenate([np.eye(n), X], axis=1)
    gram_full = Xt.T @ Xt
    M = np.zeros((n + p, n + p))
    M[:n, :n] = L
    return gram_full + lam * M, gram_full, M, Xt


def assumption_nu(X, L, lam: float) -> float:
    """Smallest eigenvalue of ``P_Xperp + lam L``; positive iff the
    penalized estimator exists.  Always lies in [0, 1]."""
    X = np.asarray(X, dtype=float)
    L = _as_dense_laplacian(L)
    _check_scale(X.shape[0])
    if lam <= 0:
        raise DataError("lambda must be > 0")
    if np.abs(X.mean(axis=0)).max() > 1e-8:
        raise DataError("X must have centered columns")
    P_perp, _, _ = _projectors(X)
    nu = float(np.linalg.eigvalsh(P_perp + lam * L)[0])
    return max(nu, 0.0)


def rnc_bias(X, L, lam: float, theta_true):
    """Exact bias vector of the penalized estimator at the true theta.

    Computed in the full (n+p) form and cross-checked against the
    decomposed alpha/beta form; the two must agree to 1e-10.
    """
    X = np.asarray(X, dtype=float)
    L = _as_dense_laplacian(L)
    theta_true = np.asarray(theta_true, dtype=float)
    n, p = X.shape
    _check_scale(n + p)
    if theta_true.shape != (n + p,):
        raise DataError(f"theta_true must have length n+p={n + p}")
    G, _, M, _ = _full_matrices(X, L, lam)
    try:
        bias = -lam * np.linalg.solve(G, M @ theta_true)
    except np.linalg.LinAlgError as exc:
        raise EstimatorNotExistError("penalized system is singular") from exc

    P_perp, _, gram_inv = _projectors(X)
    alpha = theta_true[:n]
    b_alpha = -np.linalg.solve(P_perp / lam + L, L @ alpha)
    b_beta = -gram_inv @ (X.T @ b_alpha)
    decomposed = np.concatenate([b_alpha, b_beta])
    gap = np.linalg.norm(bias - decomposed)
    if gap > 1e-10 * (1.0 + np.linalg.norm(bias)):
        raise AssertionError(
            f"bias forms disagree by {gap:.3e}; system is ill conditioned")
    return bias


def _variance_matrix(X, L, lam, sigma2):
    G, gram_full, _, _ = _full_matrices(X, L, lam)
    Ginv = np.linalg.inv(G)
    return sigma2 * (Ginv @ gram_full @ Ginv), Ginv


def rnc_exact_mse(X, L, lam: float, theta_true, sigma2: float):
    """Exact ``(mse_alpha, mse_beta, mspe)`` of the penalized estimator.

    Bias-squared plus trace of the exact covariance; the prediction term
    uses the shrinkage matrix ``S = X~ (X~'X~ + lam M)^{-1} X~'``.
    """
    X = np.asarray(X, dtype=float)
    L = _as_dense_laplacian(L)
    n, p = X.shape
    bias = rnc_bias(X, L, lam, theta_true)
    V, Ginv = _variance_matrix(X, L, lam, sigma2)
    Xt = np.concatenate([np.eye(n), X], axis=1)
    mse_alpha = float(bias[:n] @ bias[:n] + np.trace(V[:n, :n]))
    mse_beta = float(bias[n:] @ bias[n:] + np.trace(V[n:, n:]))
    S = Xt @ Ginv @ Xt.T
    mspe = float(np.linalg.norm(Xt @ bias) ** 2
                 + sigma2 * np.linalg.norm(S, "fro") ** 2)
    return mse_alpha, mse_beta, mspe


def ols_exact_mse(X, alpha_true, sigma2: float):
    """Exact ``(mse_alpha, mse_beta, mspe)`` for the common-intercept OLS
    baseline under the individual-effects model."""
    X = np.asarray(X, dtype=float)
    alpha = np.asarray(alpha_true, dtype=float)
    n = X.shape[0]
    _check_scale(n)
    gram = X.T @ X
    if np.linalg.matrix_rank(gram) < X.shape[1]:
        raise DataError("X is rank deficient")
    gram_inv = np.linalg.inv(gram)
    abar = alpha.mean()
    # total variance of (ybar * 1) is n * sigma^2 / n = sigma^2
    mse_alpha = float(np.sum((abar - alpha) ** 2) + sigma2)
    proj_alpha = gram_inv @ (X.T @ alpha)
    mse_beta = float(proj_alpha @ proj_alpha + sigma2 * np.trace(gram_inv))
    H = np.ones((n, n)) / n + X @ gram_inv @ X.T
    mspe = float(np.linalg.norm(H @ alpha - alpha) ** 2
                 + sigma2 * np.linalg.norm(H, "fro") ** 2)
    return mse_alpha, mse_beta, mspe


def theorem1_bounds(X, L, lam: float, theta_true, sigma2: float):
    """Upper bounds on (mse_alpha, mse_beta, mspe) in terms of nu, mu,
    the cohesion gradient norm and the shrinkage Frobenius norm."""
    X = np.asarray(X, dtype=float)
    L = _as_dense_laplacian(L)
    theta_true = np.asarray(theta_true, dtype=float)
    n, p = X.shape
    nu = assumption_nu(X, L, lam)
    if nu <= 0:
        raise EstimatorNotExistError("nu = 0: bounds are undefined")
    gram = X.T @ X
    mu = float(np.linalg.eigvalsh(gram)[0])
    La = L @ theta_true[:n]
    La_sq = float(La @ La)
    G, _, _, Xt = _full_matrices(X, L, lam)
    S = Xt @ np.linalg.solve(G, Xt.T)
    s_frob_sq = float(np.linalg.norm(S, "fro") ** 2)
    bound_alpha = (lam ** 2 / nu ** 2) * La_sq + n * sigma2 / nu
    bound_beta = ((lam ** 2 / (nu ** 2 * mu)) * La_sq
                  + sigma2 * (1.0 / nu + 1.0) * np.trace(np.linalg.inv(gram)))
    bound_pred = (lam ** 2 / nu) * La_sq + sigma2 * s_frob_sq
    return float(bound_alpha), float(bound_beta), float(bound_pred)


@dataclass(frozen=True)
class TheoryReport:
    """Everything the OLS comparison inequalities need, in one place."""

    n: int
    lam: float
    nu: float
    mu: float
    L_alpha_sq: float
    V_alpha: float
    shrinkage_frob: float
    xtx_inv_trace: float
    proj_alpha_sq: float  # ||(X'X)^{-1} X' alpha||^2
    bounds: tuple[float, float, float] | None = None

    def to_dict(self) -> dict:
        d = {
            "n": self.n, "lambda": self.lam, "nu": self.nu, "mu": self.mu,
            "L_alpha_sq": self.L_alpha_sq, "V_alpha": self.V_alpha,
            "shrinkage_frob": self.shrinkage_frob,
            "xtx_inv_trace": self.xtx_inv_trace,
            "proj_alpha_sq": self.proj_alpha_sq,
        }
        if self.bounds is not None:
            d["bounds"] = {"alpha": self.bounds[0], "beta": self.bounds[1],
                           "prediction": self.bounds[2]}
        return d


def theory_report(X, L, lam: float, alpha_true, sigma2: float | None = None,
                  beta_true=None) -> TheoryReport:
    """Assemble a :class:`TheoryReport` for one instance."""
    X = np.asarray(X, dtype=float)
    L = _as_dense_laplacian(L)
    alpha = np.asarray(alpha_true, dtype=float)
    n, p = X.shape
    nu = assumption_nu(X, L, lam)
    gram = X.T @ X
    gram_inv = np.linalg.inv(gram)
    mu = float(np.linalg.eigvalsh(gram)[0])
    La = L @ alpha
    G, _, _, Xt = _full_matrices(X, L, lam)
    S = Xt @ np.linalg.solve(G, Xt.T)
    proj = gram_inv @ (X.T @ alpha)
    bounds = None
    if sigma2 is not None:
        theta = np.concatenate([alpha, np.zeros(p) if beta_true is None
                                else np.asarray(beta_true, dtype=float)])
        bounds = theorem1_bounds(X, L, lam, theta, sigma2)
    return TheoryReport(
        n=n, lam=float(lam), nu=nu, mu=mu, L_alpha_sq=float(La @ La),
        V_alpha=float(np.sum((alpha - alpha.mean()) ** 2)),
        shrinkage_frob=float(np.linalg.norm(S, "fro")),
        xtx_inv_trace=float(np.trace(gram_inv)),
        proj_alpha_sq=float(proj @ proj), bounds=bounds)


def ols_comparison(report: TheoryReport, sigma2: float, n: int | None = None):
    """Evaluate both favored-method inequalities.

    Returns ``(alpha_verdict, beta_verdict)``: True means the penalized
    estimator's bound beats the exact OLS error for that block.
    """
    if n is None:
        n = report.n
    nu, lam = report.nu, report.lam
    if nu <= 0:
        raise EstimatorNotExistError("nu = 0: comparison undefined")
    alpha_lhs = (n / nu - 1.0) * sigma2
    alpha_rhs = report.V_alpha - (lam ** 2 / nu ** 2) * report.L_alpha_sq
    beta_lhs = report.xtx_inv_trace * sigma2 / nu
    beta_rhs = report.proj_alpha_sq - (lam ** 2 / report.mu) * report.L_alpha_sq
    return bool(alpha_lhs <= alpha_rhs), bool(beta_lhs <= beta_rhs)


def alpha_comparison_sigma_threshold(report: TheoryReport,
                                     n: int | None = None) -> float:
    """Largest noise sigma at which the individual-effects comparison
    still favors the penalized estimator."""
    if n is None:
        n = report.n
    rhs = report.V_alpha - (report.lam ** 2 / report.nu ** 2) * report.L_alpha_sq
    denom = n / report.nu - 1.0
    if rhs <= 0 or denom <= 0:
        return 0.0
    return float(np.sqrt(rhs / denom))


def beta_comparison_sigma_threshold(report: TheoryReport) -> float:
    """Largest sigma at which the coefficient comparison favors the
    penalized estimator."""
    rhs = report.proj_alpha_sq - (report.lam ** 2 / report.mu) * report.L_alpha_sq
    denom = report.xtx_inv_trace / report.nu
    if rhs <= 0 or denom <= 0:
        return 0.0
    return float(np.sqrt(rhs / denom))


def sparsification_bound(fit, fit_star, L, L_star, lam: float, epsilon: float,
                         m_strong: float):
    """Observed squared parameter difference against the two bounds.

    Returns ``(observed_sq_diff, bound_min_form, bound_essential)`` where
    the min-form is the full two-branch bound and the essential form is
    ``4 eps lam pen / m`` with ``pen`` the fitted cohesion penalty.
    """
    if not (0 < epsilon < 0.5):
        raise DataError("epsilon must lie in (0, 1/2)")
    if m_strong <= 0:
        raise DataError("strong-convexity constant must be positive")
    L = _as_dense_laplacian(L)
    L_star = _as_dense_laplacian(L_star)
    a = np.asarray(fit.alpha_hat, dtype=float)
    a_star = np.asarray(fit_star.alpha_hat, dtype=float)
    theta = np.concatenate([fit.alpha_hat, fit.beta_hat])
    theta_star = np.concatenate([fit_star.alpha_hat, fit_star.beta_hat])
    observed = float(np.linalg.norm(theta_star - theta) ** 2)

    pen = float(a @ (L @ a))
    pen_star = float(a_star @ (L_star @ a_star))
    branch1 = 2.0 * pen + abs(pen - pen_star) + 2.0 * epsilon * pen_star
    lam_max = float(np.linalg.eigvalsh(L)[-1])
    branch2 = (2.0 * epsilon * lam / m_strong) * lam_max ** 2 * float(a @ a)
    bound_min = (2.0 * epsilon * lam / m_strong) * min(branch1, branch2)
    bound_essential = 4.0 * epsilon * lam * pen / m_strong
    return observed, float(bound_min), float(bound_essential)
