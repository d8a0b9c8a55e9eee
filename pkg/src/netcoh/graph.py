"""Weighted undirected graphs, Laplacians and the cohesion penalty.

A :class:`Graph` is a plain immutable edge list over nodes ``0..n-1``.
Its (optionally ridge-regularized) Laplacian drives everything else in
the package: the cohesion penalty ``alpha' L alpha`` equals
``sum_{(u,v) in E} w_uv (alpha_u - alpha_v)^2 + gamma * ||alpha||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .exceptions import DataError

__all__ = [
    "Graph",
    "LaplacianMatrix",
    "from_edge_list",
    "read_edge_list",
    "write_edge_list",
    "laplacian",
    "cohesion_penalty",
    "cohesion_gradient",
    "connected_components",
    "split_for_prediction",
    "induced_subgraph",
]


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on nodes ``0..n-1``, no self-loops.

    Edges are stored once per unordered pair with strictly positive
    weights.  Instances are immutable and safe to share across threads.
    """

    n: int
    u: np.ndarray  # edge endpoints, int64
    v: np.ndarray
    w: np.ndarray  # strictly positive weights, float64

    @property
    def n_edges(self) -> int:
        return self.u.shape[0]

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.w.tolist()))

    def degrees(self) -> np.ndarray:
        """Weighted degree of every node."""
        d = np.zeros(self.n)
        np.add.at(d, self.u, self.w)
        np.add.at(d, self.v, self.w)
        return d

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric sparse adjacency matrix."""
        ij = np.concatenate([self.u, self.v])
        ji = np.concatenate([self.v, self.u])
        ww = np.concatenate([self.w, self.w])
        return sp.csr_matrix((ww, (ij, ji)), shape=(self.n, self.n))


@dataclass(frozen=True)
class LaplacianMatrix:
    """Sparse symmetric Laplacian ``D - A + ridge * I``.

    With ``ridge == 0`` the matrix is PSD with row sums zero; with
    ``ridge > 0`` it is positive definite with minimum eigenvalue
    at least ``ridge``.
    """

    dim: int
    ridge: float
    matrix: sp.csr_matrix = field(repr=False)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def from_edge_list(rows, n: int) -> Graph:
    """Build a :class:`Graph` from ``(u, v)`` or ``(u, v, w)`` rows.

    Zero-weight rows are dropped; negative weights, self-loops,
    out-of-range ids and duplicate pairs are rejected.
    """
    us, vs, ws = [], [], []
    seen = set()
    for row in rows:
        if len(row) == 2:
            u, v = row
            w = 1.0
        elif len(row) == 3:
            u, v, w = row
        else:
            raise DataError(f"edge row must have 2 or 3 fields, got {row!r}")
        u, v, w = int(u), int(v), float(w)
        if u == v:
            raise DataError(f"self-loop on node {u} is not allowed")
        if not (0 <= u < n and 0 <= v < n):
            raise DataError(f"edge ({u},{v}) has node id outside 0..{n - 1}")
        if w < 0:
            raise DataError(f"edge ({u},{v}) has negative weight {w}")
        if w == 0.0:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DataError(f"duplicate edge for pair {key}")
        seen.add(key)
        us.append(key[0])
        vs.append(key[1])
        ws.append(w)
    return Graph(
        n=n,
        u=np.asarray(us, dtype=np.int64),
        v=np.asarray(vs, dtype=np.int64),
        w=np.asarray(ws, dtype=np.float64),
    )


def read_edge_list(path, n: int | None = None) -> Graph:
    """Read an edge-list text file: one ``u v [w]`` per line.

    Fields may be separated by tabs, commas or whitespace; lines starting
    with '#' are ignored.  If ``n`` is omitted it is inferred as
    ``max(id) + 1``.
    """
    rows = []
    with open(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) not in (2, 3):
                raise DataError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            try:
                row = (int(parts[0]), int(parts[1])) if len(parts) == 2 else (
                    int(parts[0]),
                    int(parts[1]),
                    float(parts[2]),
                )
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            rows.append(row)
    if n is None:
        n = 1 + max((max(r[0], r[1]) for r in rows), default=-1)
    return from_edge_list(rows, n)


def write_edge_list(g: Graph, path) -> None:
    """Write a graph in the same ``u v w`` text format read_edge_list reads."""
    with open(path, "wt", encoding="utf-8") as fh:
        fh.write(f"# {g.n} nodes, {g.n_edges} edges\n")
        for u, v, w in zip(g.u, g.v, g.w):
            fh.write(f"{int(u)}\t{int(v)}\t{float(w)!r}\n")


def laplacian(g: Graph, gamma: float = 0.0) -> LaplacianMatrix:
    """Sparse Laplacian ``D - A + gamma * I`` of a graph."""
    if gamma < 0:
        raise DataError(f"ridge gamma must be >= 0, got {gamma}")
    d = g.degrees()
    diag = sp.diags(d + gamma, format="csr")
    lap = (diag - g.adjacency()).tocsr() if g.n_edges else diag
    return LaplacianMatrix(dim=g.n, ridge=float(gamma), matrix=lap.tocsr())


def _check_dim(L: LaplacianMatrix, alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (L.dim,):
        raise DataError(f"alpha has shape {alpha.shape}, expected ({L.dim},)")
    return alpha


def cohesion_penalty(L: LaplacianMatrix, alpha) -> float:
    """Quadratic form ``alpha' L alpha`` (always nonnegative)."""
    alpha = _check_dim(L, alpha)
    return float(alpha @ (L.matrix @ alpha))


def cohesion_gradient(L: LaplacianMatrix, alpha) -> np.ndarray:
    """``L alpha``: per-node gap between own effect and neighbor average."""
    alpha = _check_dim(L, alpha)
    return np.asarray(L.matrix @ alpha)


def connected_components(g: Graph) -> np.ndarray:
    """Component label per node; labels ordered by smallest member id."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    adj = g.adjacency() if g.n_edges else sp.csr_matrix((g.n, g.n))
    _, raw = sp.csgraph.connected_components(adj, directed=False)
    # scipy already labels by first occurrence, but normalize to be safe
    order = {}
    labels = np.empty(g.n, dtype=np.int64)
    for i, lab in enumerate(raw):
        if lab not in order:
            order[lab] = len(order)
        labels[i] = order[lab]
    return labels


def split_for_prediction(g_enlarged: Graph, test_ids):
    """Laplacian blocks of an enlarged graph, test nodes first.

    Returns ``(L11, L12, L22)`` where ``L11`` is the test-test block,
    ``L12`` test-train and ``L22`` train-train, ordered by ascending node
    id within each group.  Blocks are taken from the gamma=0 Laplacian.
    """
    test_ids = np.unique(np.asarray(list(test_ids), dtype=np.int64))
    if test_ids.size == 0:
        raise DataError("test_ids must be nonempty")
    if test_ids.min() < 0 or test_ids.max() >= g_enlarged.n:
        raise DataError("test_ids contains node ids outside the graph")
    mask = np.zeros(g_enlarged.n, dtype=bool)
    mask[test_ids] = True
    train_ids = np.flatnonzero(~mask)
    L = laplacian(g_enlarged, 0.0).matrix.tocsr()
    L11 = L[test_ids][:, test_ids].tocsr()
    L12 = L[test_ids][:, train_ids].tocsr()
    L22 = L[train_ids][:, train_ids].tocsr()
    return L11, L12, L22


def induced_subgraph(g: Graph, keep_ids) -> Graph:
    """Subgraph induced on ``keep_ids``, relabeled to 0..k-1 in id order."""
    keep_ids = np.unique(np.asarray(list(keep_ids), dtype=np.int64))
    new_id = -np.ones(g.n, dtype=np.int64)
    new_id[keep_ids] = np.arange(keep_ids.size)
    sel = (new_id[g.u] >= 0) & (new_id[g.v] >= 0)
    return Graph(
        n=int(keep_ids.size),
        u=new_id[g.u[sel]],
        v=new_id[g.v[sel]],
        w=g.w[sel].copy(),
    )
