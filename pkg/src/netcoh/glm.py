"""Logistic and Cox proportional-hazards fitting with network cohesion.

Both families maximize ``loglik(alpha + X beta) - lam * alpha'(L + gamma
I) alpha`` by Newton ascent with step halving.  The logistic Newton step
is a weighted cohesion least-squares problem solved by block
elimination; the Cox step uses the dense partial-likelihood Hessian
(Breslow handling of ties) and is intended for moderate n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .exceptions import DataError
from .graph import Graph, laplacian
from .solvers import block_eliminate_weighted, standardize

__all__ = [
    "SurvivalData",
    "GlmFit",
    "fit_logistic",
    "logistic_predict_prob",
    "logistic_baseline_fit",
    "cox_partial_loglik",
    "fit_cox",
    "cox_baseline_fit",
    "ppl_metric",
]

LINPRED_CLIP = 30.0
MAX_NEWTON_ITER = 100
MAX_HALVINGS = 20
OBJ_RTOL = 1e-9
GRAD_TOL = 1e-7
WEIGHT_FLOOR = 1e-10
MAX_COX_NODES = 2000


@dataclass(frozen=True)
class SurvivalData:
    """Right-censored survival outcomes: positive times, event indicator."""

    time: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float)
        delta = np.asarray(self.delta)
        if time.ndim != 1 or delta.shape != time.shape:
            raise DataError("time and delta must be 1-d arrays of equal length")
        if np.any(time <= 0):
            raise DataError("survival times must be strictly positive")
        if not np.isin(delta, (0, 1)).all():
            raise DataError("delta entries must be 0 (censored) or 1 (event)")
        if int(delta.sum()) == 0:
            raise DataError("at least one observed event (delta=1) is required")
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "delta", delta.astype(np.int64))

    @property
    def n(self) -> int:
        return self.time.shape[0]


@dataclass(frozen=True)
class GlmFit:
    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    lam: float
    gamma: float
    family: str
    iterations: int
    converged: bool
    objective: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    objective_trace: tuple = field(default=(), repr=False)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(eta, -LINPRED_CLIP, LINPRED_CLIP)))


def _log1pexp(eta: np.ndarray) -> np.ndarray:
    eta = np.clip(eta, -LINPRED_CLIP, LINPRED_CLIP)
    return np.log1p(np.exp(eta))


def _logistic_loglik(eta, y):
    return float(y @ eta - _log1pexp(eta).sum())


def fit_logistic(X, Y, g: Graph, lam: float, gamma: float = 0.01,
                 tol: float = GRAD_TOL, max_iter: int = MAX_NEWTON_ITER) -> GlmFit:
    """Penalized logistic fit via iteratively reweighted block elimination."""
    Y = np.asarray(Y)
    if not np.isin(Y, (0, 1)).all():
        raise DataError("logistic responses must be 0/1")
    Y = Y.astype(float)
    if lam <= 0 or gamma <= 0:
        raise DataError("logistic fits require lam > 0 and gamma > 0")
    Z, mean, scale = standardize(X, return_params=True)
    n, p = Z.shape
    if Y.shape != (n,) or g.n != n:
        raise DataError("X, Y and graph disagree on the number of nodes")
    Lg = laplacian(g, gamma).matrix
    penalty = (2.0 * lam * Lg).tocsr()

    alpha = np.zeros(n)
    beta = np.zeros(p)

    def objective(a, b):
        eta = a + Z @ b
        return _logistic_loglik(eta, Y) - lam * float(a @ (Lg @ a))

    obj = objective(alpha, beta)
    trace = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = alpha + Z @ beta
        prob = _sigmoid(eta)
        resid = Y - prob
        grad_a = resid - 2.0 * lam * (Lg @ alpha)
        grad_b = Z.T @ resid
        gnorm = np.sqrt(grad_a @ grad_a + grad_b @ grad_b)
        if gnorm <= tol:
            converged = True
            break
        w = np.maximum(prob * (1.0 - prob), WEIGHT_FLOOR)
        da, db, _ = block_eliminate_weighted(penalty, w, Z, grad_a, grad_b)
        step = 1.0
        improved = False
        for _ in range(MAX_HALVINGS + 1):
            cand = objective(alpha + step * da, beta + step * db)
            if cand >= obj:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        alpha = alpha + step * da
        beta = beta + step * db
        new_obj = objective(alpha, beta)
        trace.append(new_obj)
        if abs(new_obj - obj) <= OBJ_RTOL * (1.0 + abs(obj)):
            obj = new_obj
            converged = True
            break
        obj = new_obj
    return GlmFit(alpha_hat=alpha, beta_hat=beta, lam=float(lam),
                  gamma=float(gamma), family="logistic", iterations=it,
                  converged=converged, objective=obj, x_mean=mean,
                  x_scale=scale, objective_trace=tuple(trace))


def logistic_predict_prob(fit: GlmFit, X_new, alpha_new) -> np.ndarray:
    """Fitted probabilities ``sigmoid(X beta + alpha)`` (clipped linpred)."""
    Z = (np.asarray(X_new, dtype=float) - fit.x_mean) / fit.x_scale
    alpha_new = np.asarray(alpha_new, dtype=float)
    if Z.shape[0] != alpha_new.shape[0]:
        raise DataError("X_new and alpha_new disagree on the number of nodes")
    return _sigmoid(alpha_new + Z @ fit.beta_hat)


def logistic_baseline_fit(X, Y, tol: float = GRAD_TOL,
                          max_iter: int = MAX_NEWTON_ITER) -> GlmFit:
    """Plain logistic regression with one shared intercept (no penalty)."""
    Y = np.asarray(Y, dtype=float)
    Z, mean, scale = standardize(X, return_params=True)
    n, p = Z.shape
    D = np.column_stack([np.ones(n), Z])
    coef = np.zeros(p + 1)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = D @ coef
        prob = _sigmoid(eta)
        grad = D.T @ (Y - prob)
        if np.linalg.norm(grad) <= tol:
            converged = True
            break
        w = np.maximum(prob * (1.0 - prob), WEIGHT_FLOOR)
        H = D.T @ (w[:, None] * D) + 1e-12 * np.eye(p + 1)
        coef = coef + np.linalg.solve(H, grad)
    return GlmFit(alpha_hat=np.full(n, coef[0]), beta_hat=coef[1:],
                  lam=0.0, gamma=0.0, family="logistic-baseline",
                  iterations=it, converged=converged,
                  objective=_logistic_loglik(D @ coef, Y),
                  x_mean=mean, x_scale=scale)


# ---------------------------------------------------------------------------
# Cox partial likelihood (Breslow handling of tied event times)
# ---------------------------------------------------------------------------

def _cox_quantities(eta, surv: SurvivalData, want_hessian: bool = False):
    """Partial log-likelihood, gradient and (optionally) Hessian in eta.

    Risk sets are accumulated by a descending-time sweep; tied times
    share the full risk set (Breslow).
    """
    time, delta = surv.time, surv.delta
    n = time.shape[0]
    order = np.argsort(-time, kind="stable")
    t_sorted = time[order]
    e_eta = np.exp(eta - eta.max())  # shift for stability; cancels in ratios
    e_sorted = e_eta[order]
    cum = np.cumsum(e_sorted)
    # risk-set mass for each sorted position: include all ties with y >= t
    # last index of each tie group in the descending order
    last_of_group = np.empty(n, dtype=np.int64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and t_sorted[j + 1] == t_sorted[i]:
            j += 1
        last_of_group[i:j + 1] = j
        i = j + 1
    risk_mass_sorted = cum[last_of_group]
    risk_mass = np.empty(n)
    risk_mass[order] = risk_mass_sorted

    shift = eta.max()
    loglik = float(np.sum(delta * (eta - (np.log(risk_mass) + shift))))

    # r_v = sum over events k with y_k <= y_v of 1 / S(y_k)
    inv_mass_sorted = delta[order] / risk_mass_sorted
    r_sorted = np.cumsum(inv_mass_sorted[::-1])[::-1]
    # nodes in the same tie group share the same r (events at equal times
    # keep each other in their risk sets)
    first_of_group = np.empty(n, dtype=np.int64)
    i = 0
    while i < n:
        j = last_of_group[i]
        first_of_group[i:j + 1] = i
        i = j + 1
    r_sorted = r_sorted[first_of_group]
    r = np.empty(n)
    r[order] = r_sorted

    grad = delta - e_eta * r
    if not want_hessian:
        return loglik, grad, None

    hess = np.diag(e_eta * r)
    event_idx = np.flatnonzero(delta == 1)
    at_risk = time[:, None] >= time[None, :]  # at_risk[u, k]: y_u >= y_k
    for k in event_idx:
        pi = e_eta * at_risk[:, k] / risk_mass[k]
        hess -= np.outer(pi, pi)
    return loglik, grad, hess  # hess is -d2 loglik / d eta^2


def cox_partial_loglik(alpha, beta, X, surv: SurvivalData) -> float:
    """Breslow partial log-likelihood at ``eta = X beta + alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.shape != (surv.n, beta.shape[0]) or alpha.shape != (surv.n,):
        raise DataError("alpha, beta, X and surv disagree on dimensions")
    eta = alpha + X @ beta
    loglik, _, _ = _cox_quantities(eta, surv)
    return loglik


def fit_cox(X, surv: SurvivalData, g: Graph, lam: float, gamma: float = 0.1,
            tol: float = GRAD_TOL, max_iter: int = MAX_NEWTON_ITER) -> GlmFit:
    """Penalized Cox fit by Newton ascent with step halving.

    ``gamma > 0`` is required: the partial likelihood is shift invariant
    in alpha, and the ridge term pins ``sum(alpha) = 0`` at the optimum.
    """
    if lam <= 0 or gamma <= 0:
        raise DataError("Cox fits require lam > 0 and gamma > 0")
    Z, mean, scale = standardize(X, return_params=True)
    n, p = Z.shape
    if surv.n != n or g.n != n:
        raise DataError("X, surv and graph disagree on the number of nodes")
    if n + p > MAX_COX_NODES:
        raise DataError(f"Cox Newton is dense; n+p={n + p} exceeds guard "
                        f"({MAX_COX_NODES})")
    Lg = laplacian(g, gamma).matrix.toarray()

    theta = np.zeros(n + p)

    def objective(th):
        eta = th[:n] + Z @ th[n:]
        ll, _, _ = _cox_quantities(eta, surv)
        return ll - lam * float(th[:n] @ (Lg @ th[:n]))

    obj = objective(theta)
    trace = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        alpha, beta = theta[:n], theta[n:]
        eta = alpha + Z @ beta
        _, g_eta, h_eta = _cox_quantities(eta, surv, want_hessian=True)
        grad = np.concatenate([g_eta - 2.0 * lam * (Lg @ alpha), Z.T @ g_eta])
        if np.linalg.norm(grad) <= tol:
            converged = True
            break
        # penalized negative Hessian, positive definite thanks to gamma > 0
        H = np.empty((n + p, n + p))
        H[:n, :n] = h_eta + 2.0 * lam * Lg
        H[:n, n:] = h_eta @ Z
        H[n:, :n] = H[:n, n:].T
        H[n:, n:] = Z.T @ (h_eta @ Z) + 1e-12 * np.eye(p)
        try:
            delta = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(H, grad, rcond=None)[0]
        step = 1.0
        improved = False
        for _ in range(MAX_HALVINGS + 1):
            cand = objective(theta + step * delta)
            if cand >= obj:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        theta = theta + step * delta
        new_obj = objective(theta)
        trace.append(new_obj)
        if abs(new_obj - obj) <= OBJ_RTOL * (1.0 + abs(obj)):
            obj = new_obj
            converged = True
            break
        obj = new_obj
    return GlmFit(alpha_hat=theta[:n], beta_hat=theta[n:], lam=float(lam),
                  gamma=float(gamma), family="cox", iterations=it,
                  converged=converged, objective=obj, x_mean=mean,
                  x_scale=scale, objective_trace=tuple(trace))


def cox_baseline_fit(X, surv: SurvivalData, tol: float = GRAD_TOL,
                     max_iter: int = MAX_NEWTON_ITER) -> GlmFit:
    """Plain Cox regression (no individual effects, no penalty)."""
    Z, mean, scale = standardize(X, return_params=True)
    n, p = Z.shape
    beta = np.zeros(p)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        _, g_eta, h_eta = _cox_quantities(Z @ beta, surv, want_hessian=True)
        grad = Z.T @ g_eta
        if np.linalg.norm(grad) <= tol:
            converged = True
            break
        H = Z.T @ (h_eta @ Z) + 1e-10 * np.eye(p)
        beta = beta + np.linalg.solve(H, grad)
    ll, _, _ = _cox_quantities(Z @ beta, surv)
    return GlmFit(alpha_hat=np.zeros(n), beta_hat=beta, lam=0.0, gamma=0.0,
                  family="cox-baseline", iterations=it, converged=converged,
                  objective=ll, x_mean=mean, x_scale=scale)


def ppl_metric(fit_train: GlmFit, X_all, surv_all: SurvivalData, train_ids,
               test_ids, g_all: Graph, gamma_pred: float | None = None) -> float:
    """Predictive partial log-likelihood for held-out nodes.

    ``loglik(train + test) - loglik(train)`` with the training estimates
    held fixed and test individual effects filled in by cohesion-penalty
    minimization on the full graph.
    """
    from .selection import predict_new_nodes  # lazy: avoids a module cycle
    from .graph import split_for_prediction

    train_ids = np.asarray(sorted(train_ids), dtype=np.int64)
    test_ids = np.asarray(sorted(test_ids), dtype=np.int64)
    if test_ids.size == 0:
        return 0.0
    if np.intersect1d(train_ids, test_ids).size:
        raise DataError("train_ids and test_ids overlap")
    X_all = np.asarray(X_all, dtype=float)
    Z_all = (X_all - fit_train.x_mean) / fit_train.x_scale

    if gamma_pred is None:
        gamma_pred = fit_train.gamma
    L11, L12, _ = split_for_prediction(g_all, test_ids)
    alpha_test = predict_new_nodes(fit_train.alpha_hat, (L11, L12),
                                   gamma_pred=gamma_pred)
    if fit_train.family.startswith("cox-baseline"):
        alpha_test = np.zeros(test_ids.size)

    alpha_all = np.empty(g_all.n)
    alpha_all[train_ids] = fit_train.alpha_hat
    alpha_all[test_ids] = alpha_test

    eta_all = alpha_all + Z_all @ fit_train.beta_hat
    ll_all, _, _ = _cox_quantities(eta_all, surv_all)
    surv_train = SurvivalData(surv_all.time[train_ids],
                              surv_all.delta[train_ids])
    ll_train, _, _ = _cox_quantities(eta_all[train_ids], surv_train)
    return float(ll_all - ll_train)
