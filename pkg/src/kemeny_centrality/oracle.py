"""Brute-force reference values.

Dense, slow and deliberately simple: these routines share no code with the
production paths beyond the :class:`Graph` container, and are used to
produce expected values for the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DisconnectedGraphError, NumericalError, ParameterError, ValidationError
from .graph import Graph

__all__ = [
    "ORACLE_LIMIT",
    "FundamentalMatrix",
    "stationary",
    "fundamental_matrix",
    "mean_first_passage",
    "kemeny_mfpt",
    "kemeny_spectrum_oracle",
    "loop_modified_adjacency",
]

ORACLE_LIMIT = 2000


@dataclass(frozen=True)
class FundamentalMatrix:
    Z: np.ndarray
    pi: np.ndarray


def _dense(graph: Graph) -> np.ndarray:
    if graph.n > ORACLE_LIMIT:
        raise ParameterError(f"oracle routines are limited to n <= {ORACLE_LIMIT}")
    return graph.adjacency.toarray()


def _connected_dense(graph: Graph):
    A = _dense(graph)
    d = A.sum(axis=1)
    if np.any(d <= 0):
        raise ValidationError("every node needs positive degree")
    count, _ = _cc(sp.csr_matrix(A), directed=False)
    if count > 1:
        raise DisconnectedGraphError(f"graph has {count} components", n_components=count)
    return A, d


def stationary(graph: Graph) -> np.ndarray:
    """Invariant distribution ``pi = d / ||d||_1`` of the random walk."""
    A, d = _connected_dense(graph)
    pi = d / d.sum()
    P = A / d[:, None]
    if np.max(np.abs(pi @ P - pi)) > 1e-12:
        raise NumericalError("pi^T P != pi^T; the adjacency is not symmetric")
    return pi


def fundamental_matrix(graph: Graph) -> FundamentalMatrix:
    """``Z = (I - P + 1 pi^T)^{-1}``."""
    A, d = _connected_dense(graph)
    pi = stationary(graph)
    P = A / d[:, None]
    n = graph.n
    Z = np.linalg.inv(np.eye(n) - P + np.outer(np.ones(n), pi))
    return FundamentalMatrix(Z, pi)


def mean_first_passage(graph: Graph) -> np.ndarray:
    """Mean first-passage times ``m_ij = (Z_jj - Z_ij) / pi_j``, zero diagonal."""
    fm = fundamental_matrix(graph)
    Z, pi = fm.Z, fm.pi
    M = (np.diag(Z)[None, :] - Z) / pi[None, :]
    np.fill_diagonal(M, 0.0)
    return M


def kemeny_mfpt(graph: Graph, tol: float = 1e-9) -> float:
    """Kemeny constant as ``sum_j pi_j m_ij``, checked for every start ``i``."""
    pi = stationary(graph)
    K = mean_first_passage(graph) @ pi
    spread = K.max() - K.min()
    if spread > tol * max(1.0, abs(K[0])):
        raise NumericalError(
            f"first-passage average depends on the start state (spread {spread:.3e})"
        )
    return float(K[0])


def loop_modified_adjacency(graph: Graph, i: int, j: int) -> np.ndarray:
    """Dense ``A + a_ij v v^T`` with ``v = e_i - e_j``: edge replaced by two loops."""
    A = _dense(graph).copy()
    a = A[i, j]
    if a == 0 or i == j:
        raise ValidationError(f"({i}, {j}) is not an edge between distinct nodes")
    A[i, j] = A[j, i] = 0.0
    A[i, i] += a
    A[j, j] += a
    return A


def kemeny_spectrum_oracle(graph_or_adjacency, unit_tol: float = 1e-9) -> float:
    """``sum_{l >= 2} 1 / (1 - lambda_l)`` from a dense symmetric eigensolve.

    Accepts a :class:`Graph` or a symmetric nonnegative adjacency (for
    instance one produced by :func:`loop_modified_adjacency`); degrees are
    its row sums.
    """
    if isinstance(graph_or_adjacency, Graph):
        A = _dense(graph_or_adjacency)
    else:
        A = np.asarray(
            graph_or_adjacency.toarray() if sp.issparse(graph_or_adjacency) else graph_or_adjacency,
            dtype=np.float64,
        )
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError("adjacency must be square")
        if A.shape[0] > ORACLE_LIMIT:
            raise ParameterError(f"oracle routines are limited to n <= {ORACLE_LIMIT}")
        if not np.allclose(A, A.T, rtol=0, atol=1e-14):
            raise ValidationError("adjacency must be symmetric")
    d = A.sum(axis=1)
    if np.any(d <= 0):
        raise ValidationError("every node needs positive degree")
    s = 1.0 / np.sqrt(d)
    lam = np.sort(np.linalg.eigvalsh(A * s[:, None] * s[None, :]))[::-1]
    units = int(np.sum(np.abs(lam - 1.0) <= unit_tol))
    if units > 1:
        raise DisconnectedGraphError(
            f"eigenvalue 1 has multiplicity {units}", n_components=units
        )
    return float(np.sum(1.0 / (1.0 - lam[1:])))
