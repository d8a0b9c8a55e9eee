"""Shared helpers for the test suite: generators and dense oracles."""

import numpy as np

from netcoh import Graph, from_edge_list


def random_graph(n, p_edge, rng, weighted=False, ensure_edge=True):
    """Erdos-Renyi graph, optionally with Uniform(0.5, 2) weights."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p_edge
    if ensure_edge and not keep.any():
        keep[rng.integers(iu.size)] = True
    u, v = iu[keep], ju[keep]
    w = rng.uniform(0.5, 2.0, u.size) if weighted else np.ones(u.size)
    return Graph(n=n, u=u.astype(np.int64), v=v.astype(np.int64), w=w)


def clique(n, weight=1.0, offset=0):
    """Edge rows of a complete graph on nodes offset..offset+n-1."""
    iu, ju = np.triu_indices(n, k=1)
    return [(int(a) + offset, int(b) + offset, weight) for a, b in zip(iu, ju)]


def disjoint_cliques(sizes, weight=1.0):
    rows, offset = [], 0
    for s in sizes:
        rows += clique(s, weight=weight, offset=offset)
        offset += s
    return from_edge_list(rows, offset)


def dense_laplacian(g, gamma=0.0):
    """Dense Laplacian built independently from the edge list."""
    L = np.zeros((g.n, g.n))
    for u, v, w in zip(g.u, g.v, g.w):
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    return L + gamma * np.eye(g.n)


def dense_rnc_solve(g, X, Y, lam, gamma=0.0):
    """Direct dense solve of the penalized normal equations (test oracle).

    X must already be standardized; returns (alpha, beta).
    """
    n, p = X.shape
    L = dense_laplacian(g, gamma)
    G = np.zeros((n + p, n + p))
    G[:n, :n] = np.eye(n) + lam * L
    G[:n, n:] = X
    G[n:, :n] = X.T
    G[n:, n:] = X.T @ X
    theta = np.linalg.solve(G, np.concatenate([Y, X.T @ Y]))
    return theta[:n], theta[n:]
