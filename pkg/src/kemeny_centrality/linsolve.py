"""Linear algebra behind the scores.

Two interchangeable ways of applying ``S^{-1}``, where
``S = (1+r) D - A + d d^T / ||d||_1``:

* :class:`KemenyWorkspace`, sparse: factor ``T = (1+r) D - A = L L^T``
  once (after a minimum-degree permutation) and correct every solve with
  the Sherman-Morrison-Woodbury rank-one term,
  ``S^{-1} v = w - (d^T w / gamma) z`` with ``w = T^{-1} v``,
  ``z = T^{-1} d`` and ``gamma = ||d||_1 + d^T z``.
* :class:`DenseWorkspace`, for graphs small enough to hold ``S^{-1}``.
  It deflates each connected component separately, so ``r = 0`` works on
  disconnected graphs as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ._backend import kernels as _default_kernels
from .errors import FactorizationError, ParameterError, ValidationError
from .graph import Graph, connected_components

__all__ = [
    "DENSE_THRESHOLD",
    "SystemMatrices",
    "CholeskyFactor",
    "KemenyWorkspace",
    "DenseWorkspace",
    "build_system",
    "cholesky_factorize",
    "build_workspace",
    "build_dense_workspace",
    "solve_T",
    "apply_S_inverse",
    "dense_inverse_pair",
]

DENSE_THRESHOLD = 4096

# relative pivot below which T is declared singular
PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class SystemMatrices:
    T: sp.csc_matrix
    S_dense: np.ndarray | None
    r: float


def _check_degrees(graph: Graph):
    bad = graph.isolated_nodes()
    if bad.size:
        raise ValidationError(
            f"node {graph.labels[bad[0]]} has zero degree; the random walk is undefined there"
        )


def _deflation(graph: Graph) -> np.ndarray:
    """Sum over components C of ``d_C d_C^T / ||d_C||_1`` as a dense matrix."""
    d = graph.degrees
    comp = connected_components(graph)
    totals = np.bincount(comp.labels, weights=d, minlength=comp.count)
    same = comp.labels[:, None] == comp.labels[None, :]
    return np.where(same, np.outer(d, d) / totals[comp.labels][:, None], 0.0)


def build_system(graph: Graph, r: float = 0.0, dense: bool = False) -> SystemMatrices:
    """Assemble ``T = (1+r) D - A`` and, on request, the dense ``S``.

    For a connected graph ``S_dense = (1+r) D - A + d d^T / ||d||_1``; for a
    disconnected one the rank-one term is applied per component.
    """
    if not r >= 0:
        raise ParameterError(f"regularization must be nonnegative, got {r}")
    _check_degrees(graph)
    d = graph.degrees
    T = (sp.diags((1.0 + r) * d) - graph.adjacency).tocsc()
    T.sort_indices()
    S = None
    if dense:
        S = T.toarray() + _deflation(graph)
    return SystemMatrices(T, S, float(r))


# -- sparse Cholesky -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """``T[perm][:, perm] = L L^T`` with ``L`` stored column-wise.

    The diagonal entry is first in each column of ``L``.
    """

    perm: np.ndarray
    Lp: np.ndarray
    Li: np.ndarray
    Lx: np.ndarray
    parent: np.ndarray
    kernels: object = None

    @property
    def n(self) -> int:
        return self.perm.size

    @property
    def nnz(self) -> int:
        return int(self.Lp[-1])

    @cached_property
    def pinv(self) -> np.ndarray:
        pinv = np.empty_like(self.perm)
        pinv[self.perm] = np.arange(self.perm.size)
        return pinv

    @cached_property
    def root(self) -> np.ndarray:
        """Root of the elimination-tree component holding each column."""
        root = np.arange(self.n, dtype=np.int64)
        for c in range(self.n - 1, -1, -1):
            p = self.parent[c]
            if p >= 0:
                root[c] = root[p]
        return root

    @cached_property
    def L(self) -> sp.csc_matrix:
        return sp.csc_matrix((self.Lx, self.Li, self.Lp), shape=(self.n, self.n))

    def solve_permuted(self, B: np.ndarray) -> np.ndarray:
        """``(L L^T)^{-1} B`` for ``B`` already in factor ordering."""
        k = self.kernels or _default_kernels
        out = np.array(B, dtype=np.float64, order="C", copy=True)
        flat = out.ndim == 1
        if flat:
            out = out.reshape(-1, 1)
        k.lsolve_block(self.Lp, self.Li, self.Lx, out)
        k.ltsolve_block(self.Lp, self.Li, self.Lx, out)
        return out.ravel() if flat else out

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise ValidationError(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        x = np.empty_like(b)
        x[self.perm] = self.solve_permuted(b[self.perm])
        return x


def _ordering(T: sp.spmatrix, ordering, kernels) -> np.ndarray:
    n = T.shape[0]
    if isinstance(ordering, str):
        if ordering == "natural":
            return np.arange(n, dtype=np.int64)
        if ordering in ("minimum_degree", "amd", "md"):
            P = sp.csr_matrix(T)
            return np.asarray(
                kernels.minimum_degree(P.indptr.astype(np.int64), P.indices.astype(np.int64), n),
                dtype=np.int64,
            )
        raise ParameterError(f"unknown ordering {ordering!r}")
    perm = np.asarray(ordering, dtype=np.int64)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ParameterError("ordering must be a permutation of range(n)")
    return perm


def cholesky_factorize(T, ordering="minimum_degree", pivot_tol: float = PIVOT_TOL,
                       kernels=None) -> CholeskyFactor:
    """Sparse Cholesky factor of a symmetric positive definite matrix.

    Raises :class:`FactorizationError` when a pivot is not positive; for
    ``T = D - A`` this is the expected outcome and ``r > 0`` is the cure.
    """
    k = kernels or _default_kernels
    T = sp.csc_matrix(T, dtype=np.float64)
    n = T.shape[0]
    if T.shape != (n, n):
        raise ValidationError("matrix must be square")
    perm = _ordering(T, ordering, k)
    C = sp.triu(T[perm][:, perm], format="csc")
    C.sort_indices()
    Cp = C.indptr.astype(np.int64)
    Ci = C.indices.astype(np.int64)
    Cx = np.ascontiguousarray(C.data, dtype=np.float64)
    parent = np.asarray(k.etree(Cp, Ci, n), dtype=np.int64)
    counts = np.asarray(k.column_counts(Cp, Ci, parent, n), dtype=np.int64)
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=Lp[1:])
    Li, Lx, failed = k.cholesky_numeric(Cp, Ci, Cx, parent, Lp, pivot_tol)
    if failed >= 0:
        raise FactorizationError(
            f"non-positive pivot at column {failed} (original row {perm[failed]}); "
            "the matrix is singular or indefinite. For T = (1+r)D - A use r > 0.",
            column=int(perm[failed]),
        )
    return CholeskyFactor(perm, Lp, np.asarray(Li), np.asarray(Lx), parent, kernels)


# -- workspaces -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KemenyWorkspace:
    """Factor of ``T`` plus the quantities shared by every per-edge solve.

    ``y = L^{-1} P d`` is kept so that ``d^T T^{-1} v`` can be read off the
    forward solve alone.
    """

    graph: Graph
    r: float
    T: sp.csc_matrix
    factor: CholeskyFactor
    d: np.ndarray
    z: np.ndarray
    y: np.ndarray
    gamma: float

    @property
    def n(self) -> int:
        return self.d.size

    @property
    def total_degree(self) -> float:
        return float(self.d.sum())

    @cached_property
    def permuted(self):
        """``(d, z)`` in factor ordering."""
        perm = self.factor.perm
        return np.ascontiguousarray(self.d[perm]), np.ascontiguousarray(self.z[perm])

    def solve_T(self, b, refine: bool = False) -> np.ndarray:
        w = self.factor.solve(b)
        if refine:
            w = w + self.factor.solve(b - self.T @ w)
        return w

    def apply_S_inverse(self, v, refine: bool = False) -> np.ndarray:
        w = self.solve_T(v, refine=refine)
        delta = self.d @ w
        return w - np.multiply.outer(self.z, delta / self.gamma)


def build_workspace(graph: Graph, r: float, ordering="minimum_degree",
                    kernels=None) -> KemenyWorkspace:
    """Factor ``T = (1+r) D - A`` and precompute ``z = T^{-1} d`` and gamma."""
    if not r > 0:
        raise ParameterError(
            f"the Cholesky path needs r > 0 (got {r}); T = D - A is singular"
        )
    system = build_system(graph, r)
    factor = cholesky_factorize(system.T, ordering=ordering, kernels=kernels)
    k = kernels or _default_kernels
    d = np.asarray(graph.degrees, dtype=np.float64)
    y = np.ascontiguousarray(d[factor.perm]).reshape(-1, 1)
    k.lsolve_block(factor.Lp, factor.Li, factor.Lx, y)
    zp = y.copy()
    k.ltsolve_block(factor.Lp, factor.Li, factor.Lx, zp)
    z = np.empty(graph.n)
    z[factor.perm] = zp.ravel()
    gamma = float(d @ z + d.sum())
    return KemenyWorkspace(graph, float(r), system.T, factor, d, z, y.ravel(), gamma)


@dataclass(frozen=True, eq=False)
class DenseWorkspace:
    """Dense ``S`` with a Cholesky factorization, for small graphs."""

    graph: Graph
    r: float
    S: np.ndarray
    cho: tuple

    @property
    def d(self) -> np.ndarray:
        return self.graph.degrees

    @cached_property
    def F(self) -> np.ndarray:
        return sla.cho_solve(self.cho, np.eye(self.S.shape[0]))

    @cached_property
    def Q(self) -> np.ndarray:
        F = self.F
        return F.T @ (self.d[:, None] * F)

    def apply_S_inverse(self, v, refine: bool = False) -> np.ndarray:
        x = sla.cho_solve(self.cho, np.asarray(v, dtype=np.float64))
        if refine:
            x = x + sla.cho_solve(self.cho, v - self.S @ x)
        return x


def build_dense_workspace(graph: Graph, r: float = 0.0,
                         threshold: int = DENSE_THRESHOLD) -> DenseWorkspace:
    if graph.n > threshold:
        raise ParameterError(
            f"n={graph.n} exceeds the dense threshold {threshold}; use the Cholesky path"
        )
    S = build_system(graph, r, dense=True).S_dense
    try:
        cho = sla.cho_factor(S, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"dense S is not positive definite: {exc}") from exc
    return DenseWorkspace(graph, float(r), S, cho)


def solve_T(ws: KemenyWorkspace, b, refine: bool = False) -> np.ndarray:
    """``T^{-1} b`` through the stored factor (permutation handled inside)."""
    return ws.solve_T(b, refine=refine)


def apply_S_inverse(ws, v, refine: bool = False) -> np.ndarray:
    """``S^{-1} v`` from either workspace kind."""
    return ws.apply_S_inverse(v, refine=refine)


def dense_inverse_pair(S_dense, D, threshold: int = DENSE_THRESHOLD):
    """``F = S^{-1}`` and ``Q = F D F``; ``D`` may be a vector or a matrix."""
    S_dense = np.asarray(S_dense, dtype=np.float64)
    n = S_dense.shape[0]
    if n > threshold:
        raise ParameterError(
            f"n={n} exceeds the dense threshold {threshold}; use the Cholesky path"
        )
    D = np.asarray(D, dtype=np.float64)
    dvec = np.diag(D) if D.ndim == 2 else D
    try:
        cho = sla.cho_factor(S_dense, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"S is not positive definite: {exc}") from exc
    F = sla.cho_solve(cho, np.eye(n))
    return F, F.T @ (dvec[:, None] * F)
