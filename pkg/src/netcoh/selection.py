"""Out-of-sample prediction, cross-validation and variable selection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from joblib import Parallel, delayed

from .exceptions import DataError
from .graph import Graph, connected_components, induced_subgraph, split_for_prediction
from .glm import SurvivalData, cox_baseline_fit, fit_cox, fit_logistic, \
    logistic_predict_prob, ppl_metric
from .linear import fit_linear, predict_response

__all__ = [
    "CVReport",
    "predict_new_nodes",
    "kfold_cv",
    "mspe",
    "relative_improvement",
    "forward_selection",
    "DEFAULT_LAMBDA_GRID",
]

# 20 log-spaced points spanning ridge-dominant to cohesion-dominant regimes
DEFAULT_LAMBDA_GRID = np.logspace(-3, 2, 20)

FAMILY_GAMMA = {"linear": 0.0, "logistic": 0.01, "cox": 0.1}


@dataclass(frozen=True)
class CVReport:
    lambda_grid: np.ndarray
    fold_errors: np.ndarray  # shape (n_lambda, k)
    mean_error: np.ndarray
    std_error: np.ndarray
    selected_lambda: float

    def to_dict(self) -> dict:
        return {
            "lambda_grid": self.lambda_grid.tolist(),
            "fold_errors": self.fold_errors.tolist(),
            "mean_error": self.mean_error.tolist(),
            "std_error": self.std_error.tolist(),
            "selected_lambda": self.selected_lambda,
        }


def predict_new_nodes(alpha_hat_train, L_blocks, gamma_pred: float = 0.0):
    """Individual effects for new nodes: solve ``(L11 + g I) a = -L12 alpha``.

    With ``gamma_pred == 0`` this is the harmonic extension of the
    training effects; new nodes with no path to the training set make
    ``L11`` singular and are reported explicitly.
    """
    L11, L12 = L_blocks
    alpha = np.asarray(alpha_hat_train, dtype=float)
    L11 = sp.csr_matrix(L11)
    L12 = sp.csr_matrix(L12)
    m = L11.shape[0]
    if L12.shape != (m, alpha.shape[0]):
        raise DataError("L12 shape does not match L11 and training alpha")
    if gamma_pred < 0:
        raise DataError("gamma_pred must be >= 0")
    if gamma_pred == 0.0:
        # components of the new-node subgraph must touch the training set
        offdiag = L11 - sp.diags(L11.diagonal())
        ncomp, labels = sp.csgraph.connected_components(abs(offdiag),
                                                        directed=False)
        anchored = np.zeros(ncomp, dtype=bool)
        link_mass = np.abs(L12).sum(axis=1).A1
        for c in range(ncomp):
            anchored[c] = link_mass[labels == c].sum() > 0
        if not anchored.all():
            bad = np.flatnonzero(~anchored[labels]).tolist()
            raise DataError(
                f"new nodes {bad} are not connected to the training set; "
                "pass gamma_pred > 0 to regularize")
        system = L11.tocsc()
    else:
        system = (L11 + gamma_pred * sp.eye(m)).tocsc()
    rhs = -L12 @ alpha
    if m == 1:
        return np.array([rhs[0] / system[0, 0]])
    return np.asarray(spla.spsolve(system, rhs)).reshape(m)


def _linear_predictor(fit, X) -> np.ndarray:
    Z = (np.asarray(X, dtype=float) - fit.x_mean) / fit.x_scale
    return fit.alpha_hat + Z @ fit.beta_hat


def mspe(fit, X_test, truth_mean) -> float:
    """Mean squared error of the fitted linear predictor against E[Y]."""
    truth_mean = np.asarray(truth_mean, dtype=float)
    pred = _linear_predictor(fit, X_test)
    if pred.shape != truth_mean.shape:
        raise DataError("fit, X_test and truth_mean disagree on length")
    return float(np.mean((pred - truth_mean) ** 2))


def relative_improvement(err_model: float, err_baseline: float) -> float:
    """``1 - err_model / err_baseline``; positive favors the model."""
    if err_baseline == 0:
        raise DataError("baseline error must be nonzero")
    return 1.0 - err_model / err_baseline


def _make_folds(n: int, k: int, rng) -> list[np.ndarray]:
    perm = rng.permutation(n)
    return [np.sort(part) for part in np.array_split(perm, k)]


def _fit_family(family, X, Y, g, lam, gamma, surv=None):
    if family == "linear":
        return fit_linear(X, Y, g, lam=lam, gamma=gamma)
    if family == "logistic":
        return fit_logistic(X, Y, g, lam=lam, gamma=gamma)
    if family == "cox":
        return fit_cox(X, surv, g, lam=lam, gamma=gamma)
    raise DataError(f"unknown family {family!r}")


def _score_fold(family, X, Y, g, surv, lam, gamma, gamma_pred, test_ids):
    mask = np.zeros(g.n, dtype=bool)
    mask[test_ids] = True
    train_ids = np.flatnonzero(~mask)
    g_train = induced_subgraph(g, train_ids)
    surv_train = None
    if family == "cox":
        surv_train = SurvivalData(surv.time[train_ids], surv.delta[train_ids])
        fit = _fit_family(family, X[train_ids], None, g_train, lam, gamma,
                          surv=surv_train)
        return -ppl_metric(fit, X, surv, train_ids, test_ids, g,
                           gamma_pred=gamma_pred)
    fit = _fit_family(family, X[train_ids], Y[train_ids], g_train, lam, gamma)
    L11, L12, _ = split_for_prediction(g, test_ids)
    alpha_new = predict_new_nodes(fit.alpha_hat, (L11, L12),
                                  gamma_pred=gamma_pred)
    if family == "linear":
        pred = predict_response(fit, X[test_ids], alpha_new)
        return float(np.mean((Y[test_ids] - pred) ** 2))
    prob = np.clip(logistic_predict_prob(fit, X[test_ids], alpha_new),
                   1e-12, 1.0 - 1e-12)
    y = Y[test_ids]
    return float(-2.0 * np.mean(y * np.log(prob) + (1 - y) * np.log(1 - prob)))


def kfold_cv(X, Y, g: Graph, lambda_grid=None, k: int = 10,
             family: str = "linear", seed: int = 0,
             gamma: float | None = None, gamma_pred: float | None = None,
             n_jobs: int = 1) -> CVReport:
    """K-fold cross-validation over the lambda grid.

    Nodes are partitioned uniformly at random (seeded); each fold is
    scored by squared prediction error (linear), deviance (logistic) or
    negative predictive partial log-likelihood (Cox).  Ties in the mean
    error are broken toward larger lambda.
    """
    if k < 2:
        raise DataError("k must be >= 2")
    grid = np.asarray(DEFAULT_LAMBDA_GRID if lambda_grid is None
                      else lambda_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise DataError("lambda grid must be nonempty, positive, increasing")
    if gamma is None:
        gamma = FAMILY_GAMMA[family]
    if gamma_pred is None:
        # harmonic prediction, with a vanishing ridge so isolated held-out
        # nodes fall back to a zero effect instead of a singular system
        gamma_pred = gamma if gamma > 0 else 1e-8
    X = np.asarray(X, dtype=float)
    surv = None
    if family == "cox":
        surv = Y if isinstance(Y, SurvivalData) else SurvivalData(*Y)
    else:
        Y = np.asarray(Y, dtype=float)

    rng = np.random.default_rng(seed)
    folds = _make_folds(g.n, k, rng)
    if family == "cox":
        def ok(fs):
            return all(surv.delta.sum() - surv.delta[f].sum() >= 1 for f in fs)
        if not ok(folds):
            folds = _make_folds(g.n, k, np.random.default_rng(seed + 1))
            if not ok(folds):
                raise DataError("a CV fold leaves the training set without "
                                "events; use fewer folds")

    tasks = [(li, fi) for li in range(grid.size) for fi in range(k)]
    scores = Parallel(n_jobs=n_jobs)(
        delayed(_score_fold)(family, X, Y, g, surv, grid[li], gamma,
                             gamma_pred, folds[fi])
        for li, fi in tasks)
    errors = np.empty((grid.size, k))
    for (li, fi), s in zip(tasks, scores):
        errors[li, fi] = s
    mean = errors.mean(axis=1)
    se = errors.std(axis=1, ddof=1) / np.sqrt(k)
    # argmin with ties broken toward larger lambda
    best = np.flatnonzero(mean <= mean.min() + 0.0)[-1]
    return CVReport(lambda_grid=grid, fold_errors=errors, mean_error=mean,
                    std_error=se, selected_lambda=float(grid[best]))


def forward_selection(X_pool, Y, family: str = "linear",
                      criterion=None) -> list[int]:
    """Greedy forward ordering of pool columns.

    Linear: add the column with the largest residual-sum-of-squares drop
    (intercept always included).  Cox: add the column with the largest
    partial log-likelihood gain.  Ties break toward the smaller column
    index; constant columns are skipped with a warning.
    """
    X_pool = np.asarray(X_pool, dtype=float)
    n, p = X_pool.shape
    if p == 0:
        raise DataError("variable pool is empty")
    usable = []
    for j in range(p):
        if X_pool[:, j].std() == 0:
            warnings.warn(f"column {j} is constant and was skipped")
        else:
            usable.append(j)

    if family == "linear":
        Y = np.asarray(Y, dtype=float)

        def score(cols):
            D = np.column_stack([np.ones(n), X_pool[:, cols]])
            resid = Y - D @ np.linalg.lstsq(D, Y, rcond=None)[0]
            return -float(resid @ resid)  # larger is better
    elif family == "cox":
        surv = Y if isinstance(Y, SurvivalData) else SurvivalData(*Y)

        def score(cols):
            return cox_baseline_fit(X_pool[:, cols], surv).objective
    else:
        raise DataError(f"forward selection supports linear/cox, not {family!r}")
    if criterion is not None:
        score = criterion

    selected: list[int] = []
    remaining = list(usable)
    while remaining:
        best_j, best_val = None, -np.inf
        for j in remaining:
            val = score(selected + [j])
            if val > best_val + 1e-12:
                best_j, best_val = j, val
        selected.append(best_j)
        remaining.remove(best_j)
    return selected
