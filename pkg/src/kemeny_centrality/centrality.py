"""Kemeny-based edge centrality.

For an edge ``e = (i, j)`` of weight ``a`` four scores are available:

``deletion``
    ``K(G - e) - K(G)``, which can be negative (Braess paradox) and is
    undefined for cut-edges.
``loop``
    The change in ``K`` when ``e`` is replaced by two self-loops of weight
    ``a`` (``A + a v v^T`` with ``v = e_i - e_j``). Always nonnegative and
    infinite for cut-edges. With ``x = S^{-1} v``,
    ``alpha = a (x_i - x_j)``, ``beta = a x^T D x`` the score is
    ``beta / (1 - alpha)``.
``regularized``
    The loop score with ``S`` shifted by ``r D``; finite for every edge
    and at most ``1/r`` on cut-edges.
``filtered``
    ``1/r - c_r`` on cut-edges, ``c_r`` elsewhere.

Cut-edge scores
---------------
For a cut-edge ``1 - alpha`` is ``O(r)`` and the plain formula leaves
``1/r - c_r`` with no correct digits at ``r = 1e-8``. The two sides
``V1 (contains i)`` and ``V2`` of the cut are known, and with
``g = |V2| 1_{V1} - |V1| 1_{V2}`` (``|.|`` the degree volume, ``m`` their
product, ``|C|`` the component volume) and ``y = S^{-1} D g`` one has
``x = (g - r y) / (a |C|)``. Writing ``G1 = g^T D y`` and ``G2 = y^T D y``
this gives, without cancellation,

    1/r - c_r = (G1 - r G2) / (m |C| - r G1)
    1 - alpha = r (m |C| - r G1) / (a |C|^2)
    beta      = (m |C| - 2 r G1 + r^2 G2) / (a |C|^2)
"""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from ._backend import kernels as _default_kernels
from .errors import CutEdgeError, ParameterError, ValidationError
from .graph import EdgeRef, Graph, bridge_structure, connected_components
from .linsolve import DENSE_THRESHOLD, build_dense_workspace, build_workspace
from .markers import INFINITY

__all__ = [
    "Measure",
    "CutEdgePolicy",
    "RegularizationConfig",
    "EdgeScore",
    "EdgeUpdate",
    "ScoreTable",
    "EdgeScorer",
    "deletion_score",
    "loop_score",
    "regularized_score",
    "filtered_score",
    "all_scores_dense",
    "all_scores_cholesky",
    "edge_scores",
    "score_curve",
]

log = logging.getLogger(__name__)

DEFAULT_BLOCK = 16
# |1 - alpha| below this on a non-bridge means the solve lost accuracy
ILL_CONDITIONED_TOL = 1e-12
# with r = 0, |1 - alpha| below this is treated as a cut
UNREGULARIZED_CUT_TOL = 1e-10
_BRIDGE_CHUNK = 32


class Measure(str, enum.Enum):
    DELETION = "deletion"
    LOOP = "loop"
    REGULARIZED = "regularized"
    FILTERED = "filtered"


class CutEdgePolicy(str, enum.Enum):
    EXACT_BRIDGES = "exact_bridges"
    HEURISTIC_THRESHOLD = "heuristic_threshold"


@dataclass(frozen=True)
class RegularizationConfig:
    """Regularization settings.

    ``heuristic_threshold`` classifies ``e`` as a cut-edge when
    ``c_r(e) > threshold / r``; ``exact_bridges`` uses a bridge search.
    """

    r: float = 1e-8
    cut_edge_policy: CutEdgePolicy = CutEdgePolicy.EXACT_BRIDGES
    threshold: float = 0.5

    def __post_init__(self):
        if not 0 < self.r <= 1:
            raise ParameterError(f"r must lie in (0, 1], got {self.r}")
        if not 0 < self.threshold < 1:
            raise ParameterError(f"threshold must lie in (0, 1), got {self.threshold}")
        object.__setattr__(self, "cut_edge_policy", CutEdgePolicy(self.cut_edge_policy))


@dataclass(frozen=True)
class EdgeScore:
    edge: EdgeRef
    measure: Measure
    score: object
    alpha: float
    beta: float
    is_cut_edge: bool
    r: float
    ill_conditioned: bool = False

    @property
    def unbounded(self) -> bool:
        return self.score is INFINITY


@dataclass(frozen=True, eq=False)
class EdgeUpdate:
    """Low-rank description of an edge modification.

    Deletion: ``P_hat = P + U V^T`` with ``U = [e_i e_j]``. Loop
    replacement: ``A_hat = A + a v v^T`` with ``v = e_i - e_j``.
    """

    edge: EdgeRef
    U: np.ndarray
    VT: np.ndarray | None
    v: np.ndarray

    @classmethod
    def deletion(cls, graph: Graph, e) -> "EdgeUpdate":
        edge = graph.edge(*_endpoints(graph, e))
        i, j, a = edge
        d = graph.degrees
        if not (d[i] > a and d[j] > a):
            raise CutEdgeError(_label_edge(graph, edge), "removal leaves a node without edges")
        n = graph.n
        U = np.zeros((n, 2))
        U[i, 0] = U[j, 1] = 1.0
        A = graph.adjacency
        si = a / (d[i] * (d[i] - a))
        sj = a / (d[j] * (d[j] - a))
        VT = np.vstack([si * A[[i]].toarray()[0], sj * A[[j]].toarray()[0]])
        VT[0, j] -= a / (d[i] - a)
        VT[1, i] -= a / (d[j] - a)
        return cls(edge, U, VT, U[:, 0] - U[:, 1])

    @classmethod
    def loop(cls, graph: Graph, e) -> "EdgeUpdate":
        edge = graph.edge(*_endpoints(graph, e))
        U = np.zeros((graph.n, 2))
        U[edge.i, 0] = U[edge.j, 1] = 1.0
        return cls(edge, U, None, U[:, 0] - U[:, 1])


def _usable_cores() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _endpoints(graph: Graph, e):
    i, j = int(e[0]), int(e[1])
    if not graph.has_edge(i, j):
        raise ValidationError(f"no edge ({i}, {j}) in the graph")
    if i == j:
        raise ValidationError("self-loops are not scored")
    return i, j


def _label_edge(graph: Graph, edge: EdgeRef):
    return (graph.labels[edge.i].item(), graph.labels[edge.j].item())


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Scores of many edges in columnar form.

    ``score`` is NaN where ``unbounded`` is set; :meth:`records` turns those
    entries into :data:`INFINITY`.
    """

    graph: Graph
    measure: Measure
    r: float
    positions: np.ndarray
    score: np.ndarray
    unbounded: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    is_cut_edge: np.ndarray
    ill_conditioned: np.ndarray

    def __len__(self):
        return self.positions.size

    @property
    def rows(self) -> np.ndarray:
        return self.graph.rows[self.positions]

    @property
    def cols(self) -> np.ndarray:
        return self.graph.cols[self.positions]

    @property
    def weights(self) -> np.ndarray:
        return self.graph.weights[self.positions]

    def record(self, k: int) -> EdgeScore:
        p = self.positions[k]
        g = self.graph
        return EdgeScore(
            EdgeRef(int(g.rows[p]), int(g.cols[p]), float(g.weights[p])),
            self.measure,
            INFINITY if self.unbounded[k] else float(self.score[k]),
            float(self.alpha[k]),
            float(self.beta[k]),
            bool(self.is_cut_edge[k]),
            self.r,
            bool(self.ill_conditioned[k]),
        )

    def records(self) -> list[EdgeScore]:
        return [self.record(k) for k in range(len(self))]

    def ranking(self, digits: int | None = None) -> np.ndarray:
        """Row order by decreasing score, unbounded first, ties by labels.

        With ``digits`` the scores are compared after rounding to that many
        significant digits, so the order matches a printed table.
        """
        key = np.where(self.unbounded, np.inf, self.score)
        if digits is not None:
            key = np.array([float("%.*g" % (digits, x)) for x in key])
        labels = self.graph.labels
        return np.lexsort((labels[self.cols], labels[self.rows], -key))


class EdgeScorer:
    """Shared state for scoring many edges of one graph.

    Parameters
    ----------
    graph : Graph
    r : float
        Regularization; 0 is allowed only on the dense path.
    algorithm : {"auto", "dense", "cholesky"}
        ``auto`` goes dense when ``n <= dense_threshold``.
    threads : int
        Worker threads for the per-edge loop of the sparse path; 0 uses
        every core.
    block : int
        Edges handled together by one worker.
    """

    def __init__(self, graph: Graph, r: float = 0.0, algorithm: str = "auto", *,
                 threads: int = 1, block: int = DEFAULT_BLOCK,
                 dense_threshold: int = DENSE_THRESHOLD, ordering="minimum_degree",
                 kernels=None):
        if not (np.isfinite(r) and r >= 0):
            raise ParameterError(f"r must be a finite nonnegative number, got {r}")
        if algorithm == "auto":
            algorithm = "dense" if graph.n <= dense_threshold else "cholesky"
        if algorithm not in ("dense", "cholesky"):
            raise ParameterError(f"unknown algorithm {algorithm!r}")
        if algorithm == "dense" and graph.n > dense_threshold:
            raise ParameterError(
                f"n={graph.n} exceeds the dense threshold {dense_threshold}; use the Cholesky path"
            )
        if algorithm == "cholesky" and r == 0:
            raise ParameterError("the Cholesky path needs r > 0")
        if threads < 0:
            raise ParameterError("threads must be >= 0")
        if block < 1:
            raise ParameterError("block must be >= 1")
        self.graph = graph
        self.r = float(r)
        self.algorithm = algorithm
        self.threads = threads or _usable_cores()
        self.block = int(block)
        self.dense_threshold = dense_threshold
        self.ordering = ordering
        self.kernels = kernels or _default_kernels

    # -- cached structure -------------------------------------------------

    @cached_property
    def bridges(self):
        return bridge_structure(self.graph)

    @cached_property
    def components(self):
        return connected_components(self.graph)

    @cached_property
    def _component_nodes(self):
        return self.components.node_sets

    @cached_property
    def _component_volume(self):
        c = self.components
        return np.bincount(c.labels, weights=self.graph.degrees, minlength=c.count)

    @cached_property
    def workspace(self):
        if self.algorithm == "dense":
            return build_dense_workspace(self.graph, self.r, threshold=self.dense_threshold)
        return build_workspace(self.graph, self.r, ordering=self.ordering, kernels=self.kernels)

    @property
    def edge_positions(self) -> np.ndarray:
        """Positions of all edges that are not self-loops."""
        return np.flatnonzero(self.graph.proper_edge_mask)

    def position(self, e) -> int:
        return self.graph.edge_position(*_endpoints(self.graph, e))

    # -- kernels ------------------------------------------------------------

    def loop_diagnostics(self, positions) -> tuple[np.ndarray, np.ndarray]:
        """``alpha`` and ``beta`` from the direct formula."""
        pos = np.asarray(positions, dtype=np.int64)
        g = self.graph
        i, j, a = g.rows[pos], g.cols[pos], g.weights[pos]
        ws = self.workspace
        if self.algorithm == "dense":
            F, Q = ws.F, ws.Q
            alpha = a * (F[i, i] + F[j, j] - 2.0 * F[i, j])
            beta = a * (Q[i, i] + Q[j, j] - 2.0 * Q[i, j])
            return alpha, beta
        f = ws.factor
        dp, zp = ws.permuted
        return self.kernels.edge_alpha_beta(
            f.Lp, f.Li, f.Lx, f.parent, f.root,
            np.ascontiguousarray(f.pinv[i]), np.ascontiguousarray(f.pinv[j]),
            np.ascontiguousarray(a), dp, zp, ws.y, ws.gamma, self.block, self.threads,
        )

    def bridge_values(self, positions):
        """``(1/r - c_r, alpha, beta)`` for cut-edges, free of cancellation."""
        if self.r <= 0:
            raise ParameterError("cut-edge values need r > 0")
        pos = np.asarray(positions, dtype=np.int64)
        if not np.all(self.bridges.is_bridge[pos]):
            raise ValidationError("bridge_values called on an edge that is not a cut-edge")
        g, b, r = self.graph, self.bridges, self.r
        d = g.degrees
        comp = self.components.labels
        filtered = np.empty(pos.size)
        alpha = np.empty(pos.size)
        beta = np.empty(pos.size)
        for s in range(0, pos.size, _BRIDGE_CHUNK):
            chunk = pos[s:s + _BRIDGE_CHUNK]
            G = np.zeros((g.n, chunk.size))
            m = np.empty(chunk.size)
            vol = np.empty(chunk.size)
            for c, k in enumerate(chunk):
                i = g.rows[k]
                side = b.side(k)
                lab = comp[i]
                vC = self._component_volume[lab]
                vs = d[side].sum()
                start = b.preorder[b.child[k]]
                if start <= b.preorder[i] < start + b.subtree_size[b.child[k]]:
                    on_side, off_side = vC - vs, -vs
                else:
                    on_side, off_side = -(vC - vs), vs
                G[self._component_nodes[lab], c] = off_side
                G[side, c] = on_side
                m[c] = vs * (vC - vs)
                vol[c] = vC
            DG = d[:, None] * G
            Y = self.workspace.apply_S_inverse(DG)
            G1 = np.einsum("ij,ij->j", DG, Y)
            G2 = np.einsum("ij,ij->j", d[:, None] * Y, Y)
            a = g.weights[chunk]
            denom = m * vol - r * G1
            sl = slice(s, s + chunk.size)
            filtered[sl] = (G1 - r * G2) / denom
            alpha[sl] = 1.0 - r * denom / (a * vol**2)
            beta[sl] = (m * vol - 2.0 * r * G1 + r * r * G2) / (a * vol**2)
        return filtered, alpha, beta

    def deletion_values(self, positions) -> np.ndarray:
        """``K(G - e) - K(G)`` through a rank-2 update of the symmetrized system.

        Works on the component of each edge. Raises :class:`CutEdgeError` on
        the first cut-edge or pendant edge.
        """
        if self.algorithm != "dense" or self.r != 0:
            raise ParameterError("deletion scores use the dense path with r = 0")
        g = self.graph
        F = self.workspace.F
        d = g.degrees
        comp = self.components.labels
        out = np.empty(len(positions))
        for t, k in enumerate(np.asarray(positions, dtype=np.int64)):
            i, j, a = int(g.rows[k]), int(g.cols[k]), float(g.weights[k])
            if self.bridges.is_bridge[k]:
                raise CutEdgeError(_label_edge(g, g.edge(i, j)), "removal disconnects its component")
            if not (d[i] > a and d[j] > a):
                raise CutEdgeError(_label_edge(g, g.edge(i, j)), "removal leaves a node without edges")
            out[t] = _deletion_from_inverse(
                F, d, comp == comp[i], self._component_volume[comp[i]], i, j, a
            )
        return out

    # -- tables ---------------------------------------------------------------

    def table(self, measure="filtered", policy=CutEdgePolicy.EXACT_BRIDGES,
              threshold: float = 0.5, positions=None) -> ScoreTable:
        measure = Measure(measure)
        policy = CutEdgePolicy(policy)
        pos = self.edge_positions if positions is None else np.asarray(positions, dtype=np.int64)
        if pos.size and not np.all(self.graph.proper_edge_mask[pos]):
            raise ValidationError("self-loops are not scored")
        m = pos.size
        nan = np.full(m, np.nan)
        if m == 0:
            empty = np.zeros(0, dtype=bool)
            return ScoreTable(self.graph, measure, self.r, pos, nan, empty, nan, nan,
                              empty, empty)
        bridge = self.bridges.is_bridge[pos]
        if measure is Measure.DELETION:
            score = nan.copy()
            ok = ~bridge
            if np.any(ok):
                score[ok] = self.deletion_values(pos[ok])
            return ScoreTable(self.graph, measure, 0.0, pos, score, bridge.copy(),
                              nan, nan.copy(), bridge.copy(), np.zeros(m, dtype=bool))
        if measure in (Measure.REGULARIZED, Measure.FILTERED) and self.r == 0:
            raise ParameterError(f"the {measure.value} score needs r > 0")
        if self.r == 0:
            alpha, beta = self.loop_diagnostics(pos)
            gap = 1.0 - alpha
            near = ~bridge & (np.abs(gap) <= UNREGULARIZED_CUT_TOL)
            unbounded = bridge | near
            with np.errstate(divide="ignore", invalid="ignore"):
                score = np.where(unbounded, np.nan, beta / gap)
            return ScoreTable(self.graph, measure, 0.0, pos, score, unbounded, alpha, beta,
                              bridge.copy(), near)
        return self._regularized_table(measure, policy, threshold, pos, bridge)

    def _regularized_table(self, measure, policy, threshold, pos, bridge):
        r = self.r
        m = pos.size
        alpha = np.empty(m)
        beta = np.empty(m)
        if policy is CutEdgePolicy.EXACT_BRIDGES:
            cut = bridge.copy()
            if np.any(~cut):
                alpha[~cut], beta[~cut] = self.loop_diagnostics(pos[~cut])
        else:
            if not 0 < threshold < 1:
                raise ParameterError("threshold must lie in (0, 1)")
            if m:
                alpha[:], beta[:] = self.loop_diagnostics(pos)
            # c_r > threshold / r, written without dividing
            cut = (1.0 - alpha) < r * beta / threshold
        stable = cut & bridge
        filtered = np.empty(m)
        if np.any(stable):
            filtered[stable], alpha[stable], beta[stable] = self.bridge_values(pos[stable])
        naive = ~stable
        c = np.empty(m)
        with np.errstate(divide="ignore", invalid="ignore"):
            c[naive] = beta[naive] / (1.0 - alpha[naive])
        c[stable] = 1.0 / r - filtered[stable]
        plain_cut = naive & cut
        filtered[plain_cut] = 1.0 / r - c[plain_cut]
        filtered[~cut] = c[~cut]
        ill = ~bridge & (np.abs(1.0 - alpha) < ILL_CONDITIONED_TOL)
        if np.any(ill):
            log.warning("%d edge(s) have 1 - alpha below %g; their scores are unreliable",
                        int(ill.sum()), ILL_CONDITIONED_TOL)
        score = filtered if measure is Measure.FILTERED else c
        return ScoreTable(self.graph, measure, r, pos, score, np.zeros(m, dtype=bool),
                          alpha, beta, cut, ill)


def _deletion_from_inverse(F, d, member, volume, i, j, a):
    """Rank-2 update of ``S = D - A + d d^T / |C|`` restricted to one component.

    Removing ``e`` turns ``S`` into ``S - U B^T`` with ``U = [v, e_i + e_j]``,
    ``B = [a v, a d / |C|]``; the score is the change of ``Tr(S^{-1} D)``
    corrected for the two degrees that drop by ``a``.
    """
    xv = F[:, i] - F[:, j]
    xs = F[:, i] + F[:, j]
    X = np.column_stack([xv, xs])
    # S^{-1} d is the component indicator, so S^{-1} B needs no solve
    Y = np.column_stack([a * xv, (a / volume) * member])
    K = np.array([
        [1.0 - a * (xv[i] - xv[j]), -a * (xv[i] + xv[j])],
        [0.0, 1.0 - 2.0 * a / volume],
    ])
    YtDX = Y.T @ (d[:, None] * X)
    KinvYtDX = np.linalg.solve(K, YtDX)
    corr = 0.0
    for k in (i, j):
        corr += F[k, k] + X[k] @ np.linalg.solve(K, Y[k])
    return float(np.trace(KinvYtDX) - a * corr)


# -- single-edge API ----------------------------------------------------------


def deletion_score(graph: Graph, e) -> EdgeScore:
    """``K(G - e) - K(G)`` on the component of ``e``.

    Examples
    --------
    >>> from kemeny_centrality import Graph
    >>> g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    >>> round(deletion_score(g, (0, 1)).score, 12)
    0.166666666667
    """
    scorer = EdgeScorer(graph, 0.0, "dense")
    k = scorer.position(e)
    if scorer.bridges.is_bridge[k]:
        raise CutEdgeError(_label_edge(graph, graph.edge(*e[:2])), "removal disconnects its component")
    return scorer.table(Measure.DELETION, positions=[k]).record(0)


def loop_score(graph: Graph, e, r: float = 0.0, algorithm: str = "auto") -> EdgeScore:
    """Loop-replacement score; :data:`INFINITY` for a cut-edge when ``r = 0``."""
    scorer = EdgeScorer(graph, r, algorithm)
    return scorer.table(Measure.LOOP, positions=[scorer.position(e)]).record(0)


def regularized_score(graph: Graph, e, config: RegularizationConfig | None = None,
                      algorithm: str = "auto") -> EdgeScore:
    config = config or RegularizationConfig()
    scorer = EdgeScorer(graph, config.r, algorithm)
    return scorer.table(Measure.REGULARIZED, config.cut_edge_policy, config.threshold,
                        positions=[scorer.position(e)]).record(0)


def filtered_score(graph: Graph, e, config: RegularizationConfig | None = None,
                   algorithm: str = "auto") -> EdgeScore:
    config = config or RegularizationConfig()
    scorer = EdgeScorer(graph, config.r, algorithm)
    return scorer.table(Measure.FILTERED, config.cut_edge_policy, config.threshold,
                        positions=[scorer.position(e)]).record(0)


# -- all-edge API -------------------------------------------------------------


def edge_scores(graph: Graph, measure="filtered", config: RegularizationConfig | None = None,
                *, r: float | None = None, algorithm: str = "auto", threads: int = 1,
                block: int = DEFAULT_BLOCK) -> ScoreTable:
    """Scores of every edge except self-loops.

    ``r`` overrides ``config.r`` and may be 0 for the loop measure. The
    deletion measure always runs dense with ``r = 0``; cut-edges come back
    flagged and unbounded.
    """
    measure = Measure(measure)
    config = config or RegularizationConfig()
    if measure is Measure.DELETION:
        r, algorithm = 0.0, "dense"
    elif r is None:
        r = config.r
    scorer = EdgeScorer(graph, r, algorithm, threads=threads, block=block)
    return scorer.table(measure, config.cut_edge_policy, config.threshold)


def all_scores_dense(graph: Graph, config: RegularizationConfig | None = None,
                     measure="filtered") -> list[EdgeScore]:
    """Every edge through ``F = S^{-1}`` and ``Q = F^T D F``."""
    return edge_scores(graph, measure, config, algorithm="dense").records()


def all_scores_cholesky(graph: Graph, config: RegularizationConfig | None = None,
                        measure="filtered", threads: int = 1,
                        block: int = DEFAULT_BLOCK) -> list[EdgeScore]:
    """Every edge through one sparse factorization of ``(1+r) D - A``."""
    if Measure(measure) is Measure.DELETION:
        raise ParameterError("deletion scores are only available on the dense path")
    return edge_scores(graph, measure, config, algorithm="cholesky",
                       threads=threads, block=block).records()


def score_curve(graph: Graph, e, t: float):
    """``K`` of the chain with ``A(t) = A + t a v v^T`` on the component of ``e``.

    Returns :data:`INFINITY` at ``t = 1`` for a cut-edge.
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"t must lie in [0, 1], got {t}")
    i, j = _endpoints(graph, e)
    comp = connected_components(graph)
    nodes = comp.node_sets[comp.labels[i]]
    if t == 1.0 and bridge_structure(graph).is_bridge[graph.edge_position(i, j)]:
        return INFINITY
    sub = graph.subgraph(nodes)
    li = int(np.flatnonzero(nodes == i)[0])
    lj = int(np.flatnonzero(nodes == j)[0])
    a = graph.edge(i, j).weight
    d = sub.degrees
    S = np.diag(d) - sub.adjacency.toarray() + np.outer(d, d) / d.sum()
    # A(t) adds t a v v^T to A, so S(t) subtracts it
    S[li, li] -= t * a
    S[lj, lj] -= t * a
    S[li, lj] += t * a
    S[lj, li] += t * a
    cho = sla.cho_factor(S, lower=True)
    F = sla.cho_solve(cho, np.eye(sub.n))
    return float(d @ np.diag(F) - 1.0)
