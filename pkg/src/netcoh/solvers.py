"""SDD solvers and block elimination for the network-cohesion system.

The penalized least-squares normal equations have the block form

    [ W + P      W X   ] [a1]   [b1]
    [ X' W     X' W X  ] [a2] = [b2]

with ``W`` a positive diagonal weight matrix and ``P`` the (sparse,
SPD/SDD) penalty block.  The top row is solved iteratively by Jacobi
preconditioned conjugate gradients, and the remaining p x p Schur system
by dense Cholesky.  For the plain linear fit ``W = I``, ``P = lambda *
(L + gamma I)``, ``b1 = Y``, ``b2 = X'Y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exceptions import DataError, EstimatorNotExistError
from .graph import LaplacianMatrix

__all__ = [
    "SolveReport",
    "RNCSystem",
    "pcg_solve",
    "block_eliminate_fit",
    "block_eliminate_weighted",
    "dense_solve_oracle",
    "standardize",
]

DEFAULT_TOL = 1e-10
SCHUR_PIVOT_RTOL = 1e-12
MAX_DENSE_DIM = 5000
MAX_SCHUR_DIM = 1000


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool


@dataclass(frozen=True)
class RNCSystem:
    """Linear RNC system: penalty Laplacian, standardized design, lambda."""

    L: LaplacianMatrix
    X: np.ndarray
    lam: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.shape[0] != self.L.dim:
            raise DataError(f"X has shape {X.shape}, expected ({self.L.dim}, p)")
        if self.lam <= 0:
            raise DataError(f"lambda must be > 0, got {self.lam}")
        if X.shape[1] and np.abs(X.mean(axis=0)).max() > 1e-10:
            raise DataError("columns of X must be centered (use standardize)")
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.L.dim

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def penalty_matrix(self) -> sp.csr_matrix:
        """``lambda * (L + gamma I)`` as stored in the Laplacian."""
        return (self.lam * self.L.matrix).tocsr()


def standardize(X, return_params: bool = False):
    """Center columns to mean 0 and scale to unit (population) variance."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    if np.any(scale <= 0):
        bad = np.flatnonzero(scale <= 0).tolist()
        raise DataError(f"constant design columns cannot be standardized: {bad}")
    Z = (X - mean) / scale
    if return_params:
        return Z, mean, scale
    return Z


def pcg_solve(S, b, tol: float = DEFAULT_TOL, max_iter: int | None = None,
              preconditioner: str = "jacobi"):
    """Preconditioned conjugate gradients for a sparse SPD/SDD system.

    Returns ``(x, SolveReport)`` with convergence measured by the
    relative residual ``||Sx - b|| / ||b||``.
    """
    if tol <= 0:
        raise DataError("tol must be > 0")
    S = sp.csr_matrix(S)
    n = S.shape[0]
    if S.shape[1] != n:
        raise DataError("matrix must be square")
    asym = abs(S - S.T)
    if asym.nnz and asym.max() > 1e-12 * max(abs(S).max(), 1.0):
        raise DataError("matrix must be symmetric")
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    if max_iter is None:
        max_iter = 10 * n

    if preconditioner == "jacobi":
        diag = S.diagonal()
        if np.any(diag <= 0):
            raise DataError("Jacobi preconditioner requires a positive diagonal")
        minv = 1.0 / diag
    elif preconditioner is None or preconditioner == "none":
        minv = np.ones(n)
    else:
        raise DataError(f"unknown preconditioner {preconditioner!r}")

    x = np.zeros(n)
    r = b.copy()
    z = minv * r
    d = z.copy()
    rz = r @ z
    it = 0
    res = 1.0
    while it < max_iter:
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            break
        Sd = S @ d
        denom = d @ Sd
        if denom <= 0:
            # loss of positive definiteness; bail out with current iterate
            break
        step = rz / denom
        x += step * d
        r -= step * Sd
        z = minv * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
        it += 1
    res = np.linalg.norm(S @ x - b) / bnorm
    return x, SolveReport(iterations=it, final_residual=float(res),
                          converged=bool(res <= tol))


def _solve_sdd_block(A, B, tol, preconditioner="jacobi"):
    """Solve A Z = B column by column with PCG; B is a vector or matrix."""
    B = np.asarray(B, dtype=float)
    single = B.ndim == 1
    cols = B.reshape(-1, 1) if single else B
    Z = np.empty_like(cols)
    worst = SolveReport(0, 0.0, True)
    for j in range(cols.shape[1]):
        Z[:, j], rep = pcg_solve(A, cols[:, j], tol=tol,
                                 preconditioner=preconditioner)
        if rep.iterations >= worst.iterations:
            worst = SolveReport(rep.iterations,
                                max(rep.final_residual, worst.final_residual),
                                rep.converged and worst.converged)
    return (Z[:, 0] if single else Z), worst


def block_eliminate_weighted(penalty, weights, X, b1, b2, tol=DEFAULT_TOL):
    """Solve the weighted block system via SDD solves + p x p Schur solve.

    ``penalty`` is the sparse SPD penalty block (already scaled), and
    ``weights`` the positive diagonal of ``W``.  Raises
    :class:`EstimatorNotExistError` if the Schur complement is
    numerically singular.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if p > MAX_SCHUR_DIM:
        raise DataError(f"p={p} exceeds the dense Schur guard ({MAX_SCHUR_DIM})")
    w = np.asarray(weights, dtype=float)
    A = (sp.diags(w) + penalty).tocsr()
    WX = w[:, None] * X
    rhs = np.column_stack([WX, np.asarray(b1, dtype=float)])
    sol, report = _solve_sdd_block(A, rhs, tol)
    Z, z1 = sol[:, :p], sol[:, p]
    schur = X.T @ WX - WX.T @ Z
    schur = 0.5 * (schur + schur.T)
    try:
        cho = scipy.linalg.cho_factor(schur)
    except scipy.linalg.LinAlgError as exc:
        raise EstimatorNotExistError(
            "Schur complement is not positive definite; the penalized "
            "estimator does not exist (set gamma > 0)") from exc
    pivots = np.abs(np.diag(cho[0]))
    # compare against the unreduced Gram scale: a Schur block that is tiny
    # relative to X'WX means the design is (numerically) unidentifiable
    gram_scale = max(float(np.abs(np.diag(X.T @ WX)).max()), 1.0) if p else 1.0
    if p and pivots.min() ** 2 < SCHUR_PIVOT_RTOL * gram_scale:
        raise EstimatorNotExistError(
            "Schur complement is numerically singular; the penalized "
            "estimator does not exist (set gamma > 0)")
    a2 = scipy.linalg.cho_solve(cho, np.asarray(b2, dtype=float) - Z.T @ b1) \
        if p else np.zeros(0)
    a1 = z1 - Z @ a2 if p else z1
    return a1, a2, report


def block_eliminate_fit(sys: RNCSystem, Y, tol: float = DEFAULT_TOL):
    """Solve ``(X~'X~ + lambda M) theta = X~'Y`` by block elimination.

    Returns ``(alpha_hat, beta_hat, SolveReport)``.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.shape != (sys.n,):
        raise DataError(f"Y has shape {Y.shape}, expected ({sys.n},)")
    return block_eliminate_weighted(
        sys.penalty_matrix(), np.ones(sys.n), sys.X, Y, sys.X.T @ Y, tol=tol)


def dense_solve_oracle(sys: RNCSystem, Y):
    """Direct dense factorization of the full (n+p) x (n+p) system.

    Reference implementation for tests; guarded to small problems.
    """
    n, p = sys.n, sys.p
    if n + p > MAX_DENSE_DIM:
        raise DataError(f"n+p={n + p} exceeds dense oracle guard ({MAX_DENSE_DIM})")
    Y = np.asarray(Y, dtype=float)
    X = sys.X
    G = np.zeros((n + p, n + p))
    G[:n, :n] = np.eye(n) + sys.penalty_matrix().toarray()
    G[:n, n:] = X
    G[n:, :n] = X.T
    G[n:, n:] = X.T @ X
    rhs = np.concatenate([Y, X.T @ Y])
    eigs = np.linalg.eigvalsh(0.5 * (G + G.T))
    if eigs[0] < 1e-10 * max(eigs[-1], 1.0):
        raise EstimatorNotExistError(
            "full system matrix is numerically singular; the penalized "
            "estimator does not exist (set gamma > 0)")
    theta = np.linalg.solve(G, rhs)
    return theta[:n], theta[n:]
