import numpy as np
import pytest
from scipy.optimize import minimize

from netcoh import (DataError, cohesion_penalty, fit_linear, fitted_values,
                    from_edge_list, laplacian, null_model_fit, ols_fit,
                    predict_response, standardize)
from util import dense_laplacian, dense_rnc_solve, disjoint_cliques, \
    random_graph


def _objective(g, Z, Y, lam, gamma):
    L = dense_laplacian(g, gamma)

    def f(theta):
        a, b = theta[:g.n], theta[g.n:]
        r = Y - a - Z @ b
        return r @ r + lam * a @ L @ a

    return f


def test_fit_minimizes_the_penalized_objective():
    rng = np.random.default_rng(0)
    g = random_graph(15, 0.3, rng, weighted=True)
    X = rng.normal(size=(15, 2))
    Y = rng.normal(size=15)
    fit = fit_linear(X, Y, g, lam=0.4, gamma=0.05)
    Z = standardize(X)
    f = _objective(g, Z, Y, 0.4, 0.05)
    res = minimize(f, np.zeros(17), method="BFGS",
                   options={"gtol": 1e-10, "maxiter": 2000})
    theta_hat = np.concatenate([fit.alpha_hat, fit.beta_hat])
    assert f(theta_hat) <= res.fun + 1e-8


def test_fit_matches_dense_normal_equations():
    rng = np.random.default_rng(1)
    for _ in range(5):
        n, p = int(rng.integers(10, 40)), int(rng.integers(1, 4))
        g = random_graph(n, 0.3, rng, weighted=True)
        X = rng.normal(size=(n, p))
        Y = rng.normal(size=n)
        lam, gamma = rng.uniform(0.05, 2.0), rng.uniform(0.0, 0.2)
        fit = fit_linear(X, Y, g, lam=lam, gamma=gamma)
        a, b = dense_rnc_solve(g, standardize(X), Y, lam, gamma)
        np.testing.assert_allclose(fit.alpha_hat, a, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(fit.beta_hat, b, rtol=1e-7, atol=1e-9)


def test_stationarity_of_the_fit():
    rng = np.random.default_rng(2)
    g = random_graph(20, 0.3, rng)
    X = rng.normal(size=(20, 3))
    Y = rng.normal(size=20)
    fit = fit_linear(X, Y, g, lam=0.7)
    Z = standardize(X)
    L = dense_laplacian(g)
    r = Y - fit.alpha_hat - Z @ fit.beta_hat
    grad_a = -2 * r + 2 * 0.7 * L @ fit.alpha_hat
    grad_b = -2 * Z.T @ r
    assert np.abs(grad_a).max() < 1e-7
    assert np.abs(grad_b).max() < 1e-7


def test_ols_fit_closed_form():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 2))
    Y = rng.normal(size=30)
    fit = ols_fit(X, Y)
    Z = standardize(X)
    beta = np.linalg.lstsq(np.column_stack([np.ones(30), Z]), Y,
                           rcond=None)[0]
    np.testing.assert_allclose(fit.beta_hat, beta[1:], atol=1e-10)
    np.testing.assert_allclose(fit.alpha_hat, Y.mean(), atol=1e-12)


def test_null_model_beta_equals_ols_beta():
    rng = np.random.default_rng(4)
    for _ in range(5):
        n, p = 25, 3
        X = rng.normal(size=(n, p))
        Y = rng.normal(size=n)
        lam = rng.uniform(0.01, 10.0)
        np.testing.assert_allclose(null_model_fit(X, Y, lam=lam).beta_hat,
                                   ols_fit(X, Y).beta_hat, atol=1e-10)


def test_noiseless_component_constant_effects_recovered_exactly():
    rng = np.random.default_rng(5)
    g = disjoint_cliques([6, 7, 5])
    labels = np.repeat([0, 1, 2], [6, 7, 5])
    alpha = np.array([-1.0, 0.0, 1.0])[labels]
    X = standardize(rng.normal(size=(18, 2)))
    beta = np.array([0.5, -1.5])
    Y = alpha + X @ beta
    fit = fit_linear(X, Y, g, lam=0.3)
    np.testing.assert_allclose(fit.alpha_hat, alpha, atol=1e-8)
    np.testing.assert_allclose(fit.beta_hat, beta, atol=1e-8)


def test_large_lambda_gives_per_clique_intercepts():
    rng = np.random.default_rng(6)
    g = disjoint_cliques([8, 8])
    X = rng.normal(size=(16, 2))
    Y = rng.normal(size=16) + np.repeat([2.0, -2.0], 8)
    fit = fit_linear(X, Y, g, lam=1e6, tol=1e-13)
    assert fit.alpha_hat[:8].std() < 1e-4
    assert fit.alpha_hat[8:].std() < 1e-4


def test_cohesion_penalty_nonincreasing_in_lambda():
    rng = np.random.default_rng(7)
    for _ in range(10):
        g = random_graph(20, 0.3, rng, weighted=True)
        X = rng.normal(size=(20, 2))
        Y = rng.normal(size=20)
        L = laplacian(g, 0.0)
        pens = [cohesion_penalty(L, fit_linear(X, Y, g, lam=lam,
                                               gamma=0.01).alpha_hat)
                for lam in (0.01, 0.1, 1.0, 10.0, 100.0)]
        assert all(pens[i + 1] <= pens[i] + 1e-10 for i in range(4))


def test_node_permutation_equivariance():
    rng = np.random.default_rng(8)
    g = random_graph(15, 0.3, rng, weighted=True)
    X = rng.normal(size=(15, 2))
    Y = rng.normal(size=15)
    fit = fit_linear(X, Y, g, lam=0.5, gamma=0.01)
    perm = rng.permutation(15)
    inv = np.argsort(perm)
    g_perm = from_edge_list(
        [(int(inv[u]), int(inv[v]), w) for u, v, w in g.edges], 15)
    fit_perm = fit_linear(X[perm], Y[perm], g_perm, lam=0.5, gamma=0.01)
    np.testing.assert_allclose(fit_perm.alpha_hat, fit.alpha_hat[perm],
                               atol=1e-9)
    np.testing.assert_allclose(fit_perm.beta_hat, fit.beta_hat, atol=1e-9)


def test_predict_on_training_nodes_reproduces_fitted_values():
    rng = np.random.default_rng(9)
    g = random_graph(12, 0.4, rng)
    X = rng.normal(size=(12, 2))
    Y = rng.normal(size=12)
    fit = fit_linear(X, Y, g, lam=0.2, gamma=0.01)
    np.testing.assert_allclose(predict_response(fit, X, fit.alpha_hat),
                               fitted_values(fit, X), atol=1e-12)


def test_shape_validation():
    rng = np.random.default_rng(10)
    g = random_graph(10, 0.4, rng)
    X = rng.normal(size=(10, 2))
    with pytest.raises(DataError):
        fit_linear(X, rng.normal(size=9), g, lam=0.5)
    with pytest.raises(DataError):
        fit_linear(X[:9], rng.normal(size=10), g, lam=0.5)
