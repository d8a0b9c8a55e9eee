import numpy as np
import pytest

from netcoh import (DataError, effective_resistances, from_edge_list,
                    laplacian, spectral_sparsify, verify_spectral_approx)
from netcoh.simulate import dense_block_graph, sbm_generate, SimConfig
from util import disjoint_cliques, random_graph


def test_effective_resistance_path_graph():
    g = from_edge_list([(0, 1), (1, 2)], 3)
    np.testing.assert_allclose(effective_resistances(g), [1.0, 1.0],
                               atol=1e-12)


def test_effective_resistance_triangle():
    g = from_edge_list([(0, 1), (1, 2), (0, 2)], 3)
    np.testing.assert_allclose(effective_resistances(g), 2.0 / 3.0,
                               atol=1e-12)


def test_effective_resistance_weighted_parallel_structure():
    # two paths 0-1 (weight 2) and 0-2-1 (weights 1, 1): R(0,1) combines
    # 1/2 in parallel with 2 -> 0.4
    g = from_edge_list([(0, 1, 2.0), (0, 2, 1.0), (1, 2, 1.0)], 3)
    R = effective_resistances(g)
    edges = {(u, v): r for (u, v, _), r in zip(g.edges, R)}
    assert edges[(0, 1)] == pytest.approx(0.4, rel=1e-12)


def test_resistance_sum_identity():
    # sum of w_e R_e equals n minus the number of components
    rng = np.random.default_rng(0)
    for _ in range(5):
        g = random_graph(20, 0.3, rng, weighted=True)
        from netcoh import connected_components
        ncomp = connected_components(g).max() + 1
        total = float(np.sum(g.w * effective_resistances(g)))
        assert total == pytest.approx(20 - ncomp, rel=1e-10)


def test_sparsifier_edges_are_subset_and_deterministic():
    g = dense_block_graph(60)
    r1 = spectral_sparsify(g, 0.3, seed=42)
    r2 = spectral_sparsify(g, 0.3, seed=42)
    np.testing.assert_array_equal(r1.graph_star.u, r2.graph_star.u)
    np.testing.assert_array_equal(r1.graph_star.w, r2.graph_star.w)
    original = set(zip(g.u.tolist(), g.v.tolist()))
    kept = set(zip(r1.graph_star.u.tolist(), r1.graph_star.v.tolist()))
    assert kept <= original


def test_verify_identity_and_scaled_failure():
    g = random_graph(25, 0.3, np.random.default_rng(1), weighted=True)
    L = laplacian(g, 0.0)
    ok, measured = verify_spectral_approx(L, L, 0.05)
    assert ok and measured < 1e-10
    L_scaled = laplacian(g, 0.0).matrix * 1.5
    ok2, measured2 = verify_spectral_approx(L, L_scaled, 0.1)
    assert not ok2 and measured2 == pytest.approx(0.5, abs=1e-8)


def test_total_weight_concentrates_for_small_epsilon():
    g = dense_block_graph(80)
    res = spectral_sparsify(g, 0.05, seed=3)
    rel = abs(res.graph_star.w.sum() - g.w.sum()) / g.w.sum()
    assert rel < 0.1


def test_sbm_sparsification_usually_verifies():
    cfg = SimConfig(n=120)
    hits = 0
    for seed in range(5):
        g, _ = sbm_generate(cfg, seed=seed)
        res = spectral_sparsify(g, 0.3, seed=seed, verify=True)
        hits += bool(res.verified)
    assert hits >= 4


def test_disconnected_graph_resistances():
    g = disjoint_cliques([3, 3])
    R = effective_resistances(g)
    np.testing.assert_allclose(R, 2.0 / 3.0, atol=1e-12)


def test_epsilon_validation():
    g = dense_block_graph(20)
    with pytest.raises(DataError):
        spectral_sparsify(g, 0.7, seed=0)
    with pytest.raises(DataError):
        spectral_sparsify(g, 0.0, seed=0)
