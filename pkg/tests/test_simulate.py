import numpy as np
import pytest

from netcoh import (DataError, SimConfig, SurvivalData, connected_components,
                    dense_block_graph, er_components_generate, gen_data,
                    run_experiment, sbm_generate, sparsification_experiment)


def test_sbm_generate_is_deterministic():
    cfg = SimConfig(n=80, seed=5)
    g1, l1 = sbm_generate(cfg)
    g2, l2 = sbm_generate(cfg)
    np.testing.assert_array_equal(l1, l2)
    np.testing.assert_array_equal(g1.u, g2.u)
    np.testing.assert_array_equal(g1.v, g2.v)


def test_sbm_block_densities():
    cfg = SimConfig(n=300, seed=0)
    g, labels = sbm_generate(cfg)
    A = g.adjacency().toarray()
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    within = A[same].mean()
    between = A[~same & ~np.eye(300, dtype=bool)].mean()
    assert within == pytest.approx(0.5, abs=0.05)
    assert between == pytest.approx(0.1, abs=0.03)


def test_er_components_are_disjoint():
    g = er_components_generate([10, 15, 5], p_edge=0.5, seed=1)
    assert g.n == 30
    labels = connected_components(g)
    # no edge crosses the size boundaries
    blocks = np.repeat([0, 1, 2], [10, 15, 5])
    for u, v, _ in g.edges:
        assert blocks[u] == blocks[v]


def test_dense_block_graph_is_complete_and_weighted():
    g = dense_block_graph(12, n_blocks=3, within_weight=1.0,
                          between_weight=0.1)
    assert g.n_edges == 12 * 11 // 2
    blocks = np.repeat([0, 1, 2], 4)
    for u, v, w in g.edges:
        assert w == (1.0 if blocks[u] == blocks[v] else 0.1)


def test_gen_data_standardized_and_deterministic():
    cfg = SimConfig(n=100, seed=2)
    g, labels = sbm_generate(cfg)
    X1, a1, b1, Y1 = gen_data(cfg, labels, "linear")
    X2, a2, b2, Y2 = gen_data(cfg, labels, "linear")
    np.testing.assert_array_equal(X1, X2)
    np.testing.assert_array_equal(Y1, Y2)
    np.testing.assert_allclose(X1.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(X1.std(axis=0), 1.0, atol=1e-10)


def test_gen_data_families():
    cfg = SimConfig(n=200, seed=3)
    g, labels = sbm_generate(cfg)
    _, _, _, y_bin = gen_data(cfg, labels, "logistic")
    assert set(np.unique(y_bin)) <= {0.0, 1.0}
    _, _, _, surv = gen_data(cfg, labels, "cox")
    assert isinstance(surv, SurvivalData)
    assert np.all(surv.time > 0)
    censored = 1.0 - surv.delta.mean()
    assert 0.15 < censored < 0.45
    with pytest.raises(DataError):
        gen_data(cfg, labels, "poisson")


def test_config_validation():
    with pytest.raises(DataError):
        SimConfig(pi=(0.5, 0.5), K=3)
    with pytest.raises(DataError):
        SimConfig(p_within=1.5)
    with pytest.raises(DataError):
        SimConfig(sigma=-1.0)


def test_run_experiment_schema():
    cfg = SimConfig(n=60, seed=4, replications=2)
    rows = run_experiment(cfg, s_grid=(0.1, 1.0), family="linear",
                          lambda_grid=(0.01, 0.1, 1.0), cv_folds=3)
    assert len(rows) == 2 * 2 * 3  # s values x reps x methods
    keys = {"s", "rep", "method", "family", "lambda", "imp_alpha",
            "imp_beta", "imp_pred", "error"}
    for row in rows:
        assert keys <= set(row)
    combos = {(r["s"], r["rep"], r["method"]) for r in rows}
    assert len(combos) == len(rows)
    clean = [r for r in rows if not r["error"]]
    assert all(np.isfinite(r["imp_alpha"]) for r in clean)


def test_run_experiment_is_seed_deterministic():
    cfg = SimConfig(n=50, seed=9, replications=1)
    r1 = run_experiment(cfg, s_grid=(0.1,), family="linear",
                        lambda_grid=(0.1, 1.0), cv_folds=3)
    r2 = run_experiment(cfg, s_grid=(0.1,), family="linear",
                        lambda_grid=(0.1, 1.0), cv_folds=3)
    for a, b in zip(r1, r2):
        assert a == b


def test_sparsification_experiment_bounds_hold_small():
    cfg = SimConfig(n=60, lam=0.1, seed=0)
    rows = sparsification_experiment(cfg, epsilon_grid=(0.1, 0.3), seed=0)
    for row in rows:
        assert row["observed_sq_diff"] <= row["bound_min_form"]
        assert 0.0 <= row["zero_fraction"] < 1.0
    assert rows[0]["observed_sq_diff"] <= rows[1]["observed_sq_diff"]
