"""Kemeny constant of the random walk ``P = D^{-1} A`` on a weighted graph.

Three independent routes are provided so that each can check the others:

* the trace route, ``K = Tr(W) - 1`` with ``W = D^{1/2} S^{-1} D^{1/2}`` and
  ``S = D - A + d d^T / ||d||_1``;
* the eigenvalue route, ``K = sum_{l >= 2} 1 / (1 - lambda_l)`` over the
  spectrum of ``D^{-1/2} A D^{-1/2}``;
* the regularized route, ``K_r = Tr(S_r^{-1} D) - 1/(1+r)`` with
  ``S_r = (1+r) D - A + d d^T / ||d||_1``, finite on disconnected graphs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DisconnectedGraphError, NumericalError, ParameterError, ValidationError
from .graph import Graph, connected_components
from .linsolve import DENSE_THRESHOLD, build_system, build_workspace
from .markers import INFINITY

__all__ = [
    "EIGEN_LIMIT",
    "KemenyMethod",
    "KemenyResult",
    "TransitionSpectrum",
    "transition_spectrum",
    "kemeny_trace",
    "kemeny_eig",
    "kemeny_regularized",
    "kemeny_per_component",
    "kemeny_with_h",
]

# largest n handed to the dense symmetric eigensolver
EIGEN_LIMIT = 2000


class KemenyMethod(str, enum.Enum):
    TRACE = "trace"
    EIGEN = "eigen"
    REGULARIZED = "regularized"


@dataclass(frozen=True)
class KemenyResult:
    """A Kemeny constant and how it was obtained.

    ``value`` is :data:`~kemeny_centrality.markers.INFINITY` for an
    unregularized request on a disconnected graph; ``per_component`` then
    holds the finite constants of the individual blocks.
    """

    value: object
    method: KemenyMethod
    r: float = 0.0
    per_component: tuple | None = None

    @property
    def finite(self) -> bool:
        return self.value is not INFINITY

    def __float__(self):
        if not self.finite:
            raise ArithmeticError("the Kemeny constant is unbounded")
        return float(self.value)


@dataclass(frozen=True)
class TransitionSpectrum:
    """Eigenvalues of ``D^{-1/2} A D^{-1/2}`` in decreasing order."""

    eigenvalues: np.ndarray
    unit_multiplicity: int


def _require_edges(graph: Graph):
    if graph.n < 2:
        raise ValidationError("a Kemeny constant needs at least two nodes")
    bad = graph.isolated_nodes()
    if bad.size:
        raise ValidationError(f"node {graph.labels[bad[0]]} has zero degree")


def _require_connected(graph: Graph, what: str):
    comp = connected_components(graph)
    if comp.count > 1:
        raise DisconnectedGraphError(
            f"{what} needs a connected graph but found {comp.count} components; "
            "use kemeny_per_component or kemeny_regularized",
            n_components=comp.count,
        )


def _check_dense(n: int, limit: int, what: str):
    if n > limit:
        raise ParameterError(f"{what} is dense and limited to n <= {limit}, got n={n}")


def transition_spectrum(graph: Graph, unit_tol: float = 1e-9) -> TransitionSpectrum:
    """Spectrum of the symmetrized transition matrix.

    Eigenvalues within ``unit_tol`` of 1 are counted as unit eigenvalues;
    for a graph without isolated nodes their number is the number of
    connected components.
    """
    _require_edges(graph)
    _check_dense(graph.n, EIGEN_LIMIT, "transition_spectrum")
    s = 1.0 / np.sqrt(graph.degrees)
    N = graph.adjacency.toarray() * s[:, None] * s[None, :]
    lam = sla.eigh(N, eigvals_only=True)[::-1]
    return TransitionSpectrum(lam, int(np.sum(np.abs(lam - 1.0) <= unit_tol)))


def _dense_trace(graph: Graph, r: float) -> float:
    """``Tr(S_r^{-1} D)`` with the global rank-one term."""
    d = graph.degrees
    T = build_system(graph, r).T.toarray()
    S = T + np.outer(d, d) / d.sum()
    try:
        cho = sla.cho_factor(S, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"S is not positive definite: {exc}") from exc
    F = sla.cho_solve(cho, np.eye(graph.n))
    return float(d @ np.diag(F))


def kemeny_trace(graph: Graph, threshold: int = DENSE_THRESHOLD) -> KemenyResult:
    """Kemeny constant through ``Tr(W) - 1``.

    Examples
    --------
    >>> from kemeny_centrality import Graph
    >>> g = Graph.from_edges(2, [(0, 1)])
    >>> round(kemeny_trace(g).value, 12)
    0.5
    """
    _require_edges(graph)
    _require_connected(graph, "kemeny_trace")
    _check_dense(graph.n, threshold, "kemeny_trace")
    return KemenyResult(_dense_trace(graph, 0.0) - 1.0, KemenyMethod.TRACE)


def kemeny_eig(graph: Graph) -> KemenyResult:
    """Kemeny constant as ``sum_{l >= 2} 1 / (1 - lambda_l)``."""
    spectrum = transition_spectrum(graph)
    if spectrum.unit_multiplicity > 1:
        raise DisconnectedGraphError(
            f"eigenvalue 1 has multiplicity {spectrum.unit_multiplicity}; the graph is disconnected",
            n_components=spectrum.unit_multiplicity,
        )
    value = float(np.sum(1.0 / (1.0 - spectrum.eigenvalues[1:])))
    return KemenyResult(value, KemenyMethod.EIGEN)


def kemeny_regularized(graph: Graph, r: float, algorithm: str = "auto",
                       threshold: int = DENSE_THRESHOLD, block: int = 64) -> KemenyResult:
    """Regularized Kemeny constant ``K_r``, finite for any graph.

    Parameters
    ----------
    r : float
        Shift, strictly positive.
    algorithm : {"auto", "dense", "cholesky"}
        The sparse route recovers the diagonal of ``S_r^{-1}`` from the
        Cholesky factor of ``T = (1+r) D - A`` one block of unit vectors
        at a time, which costs ``n`` solves; it is meant for moderate sizes.
    """
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    _require_edges(graph)
    if algorithm == "auto":
        algorithm = "dense" if graph.n <= threshold else "cholesky"
    if algorithm == "dense":
        _check_dense(graph.n, threshold, "dense kemeny_regularized")
        tr = _dense_trace(graph, r)
    elif algorithm == "cholesky":
        ws = build_workspace(graph, r)
        f = ws.factor
        diag = np.empty(graph.n)
        for s in range(0, graph.n, block):
            cols = np.arange(s, min(s + block, graph.n))
            E = np.zeros((graph.n, cols.size))
            E[cols, np.arange(cols.size)] = 1.0
            diag[f.perm[cols]] = f.solve_permuted(E)[cols, np.arange(cols.size)]
        # S^{-1} = T^{-1} - z z^T / gamma
        tr = float(ws.d @ (diag - ws.z**2 / ws.gamma))
    else:
        raise ParameterError(f"unknown algorithm {algorithm!r}")
    return KemenyResult(tr - 1.0 / (1.0 + r), KemenyMethod.REGULARIZED, float(r))


def kemeny_per_component(graph: Graph) -> KemenyResult:
    """Kemeny constant of each connected component.

    ``value`` is the constant itself for a connected graph and
    :data:`INFINITY` otherwise.
    """
    _require_edges(graph)
    comp = connected_components(graph)
    values = []
    for nodes in comp.node_sets:
        if nodes.size < 2:
            raise ValidationError(f"node {graph.labels[nodes[0]]} is isolated")
        values.append(kemeny_trace(graph.subgraph(nodes)).value)
    value = values[0] if comp.count == 1 else INFINITY
    return KemenyResult(value, KemenyMethod.TRACE, 0.0, tuple(values))


def kemeny_with_h(graph: Graph, h) -> float:
    """``Tr((I - P + 1 h^T)^{-1}) - 1`` for an arbitrary ``h`` with ``h^T 1 = 1``.

    The result does not depend on ``h``; this unsymmetrized form exists to
    check that.
    """
    _require_edges(graph)
    _require_connected(graph, "kemeny_with_h")
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (graph.n,) or not np.isclose(h.sum(), 1.0, rtol=0, atol=1e-12):
        raise ParameterError("h must be a length-n vector summing to 1")
    P = graph.adjacency.toarray() / graph.degrees[:, None]
    M = np.eye(graph.n) - P + np.outer(np.ones(graph.n), h)
    return float(np.trace(np.linalg.inv(M)) - 1.0)
