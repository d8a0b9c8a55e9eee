"""Spectral sparsification by effective-resistance sampling.

Edges are sampled with replacement with probability proportional to
``w_e * R_e`` and reweighted so the sparsified Laplacian is an unbiased
estimate of the original.  Verification of the two-sided spectral
approximation is opt-in (it is the expensive step).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import DataError
from .graph import Graph, LaplacianMatrix, connected_components, laplacian

__all__ = [
    "SparsifyResult",
    "effective_resistances",
    "spectral_sparsify",
    "verify_spectral_approx",
]

DEFAULT_OVERSAMPLING = 9.0
MAX_DENSE_NODES = 5000


@dataclass(frozen=True)
class SparsifyResult:
    graph_star: Graph
    epsilon_target: float
    edges_kept: int
    verified: bool | None = None
    measured_epsilon: float | None = None


def effective_resistances(g: Graph) -> np.ndarray:
    """Effective resistance of every edge, computed per component.

    Uses the dense pseudoinverse of each component Laplacian; guarded to
    desk-scale graphs.
    """
    if g.n > MAX_DENSE_NODES:
        raise DataError(f"dense resistance computation guarded to n <= "
                        f"{MAX_DENSE_NODES}")
    labels = connected_components(g)
    R = np.empty(g.n_edges)
    for lab in np.unique(labels):
        nodes = np.flatnonzero(labels == lab)
        if nodes.size < 2:
            continue
        pos = -np.ones(g.n, dtype=np.int64)
        pos[nodes] = np.arange(nodes.size)
        sel = np.flatnonzero(labels[g.u] == lab)
        Lc = np.zeros((nodes.size, nodes.size))
        uu, vv, ww = pos[g.u[sel]], pos[g.v[sel]], g.w[sel]
        np.add.at(Lc, (uu, uu), ww)
        np.add.at(Lc, (vv, vv), ww)
        np.add.at(Lc, (uu, vv), -ww)
        np.add.at(Lc, (vv, uu), -ww)
        Lp = np.linalg.pinv(Lc, hermitian=True)
        R[sel] = Lp[uu, uu] + Lp[vv, vv] - 2.0 * Lp[uu, vv]
    return R


def spectral_sparsify(g: Graph, epsilon: float, seed: int,
                      oversampling: float = DEFAULT_OVERSAMPLING,
                      verify: bool = False) -> SparsifyResult:
    """Sample ``ceil(C n ln n / eps^2)`` edges by effective resistance.

    Duplicated draws are merged by weight; the output graph never
    contains an edge absent from the input.  With ``verify=True`` the
    two-sided spectral certificate is computed as well.
    """
    if not (0 < epsilon < 0.5):
        raise DataError("epsilon must lie in (0, 1/2)")
    if g.n_edges == 0 or g.n < 2:
        return SparsifyResult(graph_star=g, epsilon_target=float(epsilon),
                              edges_kept=g.n_edges)
    R = effective_resistances(g)
    scores = g.w * R
    probs = scores / scores.sum()
    q = int(np.ceil(oversampling * g.n * np.log(g.n) / epsilon ** 2))
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(q, probs)
    kept = np.flatnonzero(counts > 0)
    w_star = counts[kept] * g.w[kept] / (q * probs[kept])
    g_star = Graph(n=g.n, u=g.u[kept].copy(), v=g.v[kept].copy(), w=w_star)
    verified = measured = None
    if verify:
        verified, measured = verify_spectral_approx(
            laplacian(g, 0.0), laplacian(g_star, 0.0), epsilon)
    return SparsifyResult(graph_star=g_star, epsilon_target=float(epsilon),
                          edges_kept=int(kept.size), verified=verified,
                          measured_epsilon=measured)


def verify_spectral_approx(L, L_star, epsilon: float):
    """Check ``(1-eps) L <= L* <= (1+eps) L`` on the range space of L.

    Returns ``(verified, measured_epsilon)`` where the measured value is
    the largest deviation ``|mu - 1|`` over generalized eigenvalues of
    ``L* x = mu L x`` restricted to range(L).
    """
    def dense(M):
        if isinstance(M, LaplacianMatrix) or sp.issparse(M):
            return M.toarray()
        return np.asarray(M, dtype=float)

    A, B = dense(L), dense(L_star)
    if A.shape != B.shape:
        raise DataError("Laplacians must have the same dimension")
    if A.shape[0] > MAX_DENSE_NODES:
        raise DataError(f"dense verification guarded to n <= {MAX_DENSE_NODES}")
    evals, evecs = np.linalg.eigh(A)
    keep = evals > 1e-10 * max(evals[-1], 1.0)
    if not keep.any():
        return True, 0.0
    V = evecs[:, keep]
    d = evals[keep]
    # whiten: mu are eigenvalues of D^{-1/2} V' L* V D^{-1/2}
    W = (V / np.sqrt(d)).T @ B @ (V / np.sqrt(d))
    mus = np.linalg.eigvalsh(0.5 * (W + W.T))
    measured = float(np.abs(mus - 1.0).max())
    return bool(measured <= epsilon), measured
