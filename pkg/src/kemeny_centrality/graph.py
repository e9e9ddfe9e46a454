"""Weighted undirected graphs: storage, file loaders and structural queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import InputOutputError, ParseError, ValidationError

__all__ = [
    "EdgeRef",
    "Graph",
    "ComponentLabeling",
    "BridgeStructure",
    "load_edge_list",
    "load_matrix_market",
    "load_coordinates",
    "assign_length_weights",
    "connected_components",
    "find_bridges",
    "bridge_structure",
    "disjoint_union",
]


class EdgeRef(NamedTuple):
    i: int
    j: int
    weight: float


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph with canonical edge arrays.

    Edges are stored once with ``rows[k] <= cols[k]``, sorted
    lexicographically, with strictly positive merged weights. Self-loops sit
    on the diagonal of the adjacency matrix and are counted once in the
    degree of their node, so ``degrees == A @ 1``.

    ``labels[k]`` is the identifier node ``k`` had in the input file.
    Build instances with :meth:`from_edges`; the constructor expects
    already-canonical arrays.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    labels: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.labels is None:
            object.__setattr__(self, "labels", np.arange(self.n, dtype=np.int64))
        for arr in (self.rows, self.cols, self.weights, self.labels):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence], labels=None) -> "Graph":
        """Canonicalize ``(i, j[, w])`` triples (0-based) into a graph.

        Duplicate pairs, in either orientation, are merged by summing their
        weights. Zero weights are dropped; negative or non-finite weights are
        rejected.
        """
        edges = list(edges)
        if not edges:
            empty_i = np.empty(0, dtype=np.int64)
            return cls._build(n, empty_i, empty_i.copy(), np.empty(0), labels)
        i = np.fromiter((e[0] for e in edges), dtype=np.int64, count=len(edges))
        j = np.fromiter((e[1] for e in edges), dtype=np.int64, count=len(edges))
        w = np.fromiter(
            (e[2] if len(e) > 2 else 1.0 for e in edges), dtype=np.float64, count=len(edges)
        )
        return cls.from_arrays(n, i, j, w, labels)

    @classmethod
    def from_arrays(cls, n, i, j, w=None, labels=None) -> "Graph":
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        w = np.ones(i.shape, dtype=np.float64) if w is None else np.asarray(w, dtype=np.float64)
        if not (i.shape == j.shape == w.shape):
            raise ValidationError("edge arrays must have equal length")
        if i.size and (min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= n):
            raise ValidationError(f"edge endpoint outside node range 0..{n - 1}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("edge weights must be finite")
        if np.any(w < 0):
            raise ValidationError("edge weights must be nonnegative")
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        return cls._build(n, lo, hi, w, labels)

    @classmethod
    def _build(cls, n, lo, hi, w, labels):
        if lo.size:
            key = lo * max(n, 1) + hi
            uniq, inverse = np.unique(key, return_inverse=True)
            merged = np.zeros(uniq.size)
            np.add.at(merged, inverse, w)
            lo, hi = uniq // max(n, 1), uniq % max(n, 1)
            keep = merged > 0
            lo, hi, w = lo[keep], hi[keep], merged[keep]
        if labels is not None:
            labels = np.asarray(labels)
            if labels.shape != (n,):
                raise ValidationError("labels must have one entry per node")
            labels = labels.copy()
        return cls(int(n), lo.astype(np.int64), hi.astype(np.int64), w.astype(np.float64), labels)

    # -- derived data -----------------------------------------------------

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.weights, self.weights[off]])
        A = sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))
        A.sort_indices()
        return A

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n)
        off = self.rows != self.cols
        np.add.at(d, self.rows, self.weights)
        np.add.at(d, self.cols[off], self.weights[off])
        d.setflags(write=False)
        return d

    @property
    def total_degree(self) -> float:
        return float(self.degrees.sum())

    @property
    def n_entries(self) -> int:
        """Number of stored edges, self-loops included."""
        return int(self.rows.size)

    @cached_property
    def proper_edge_mask(self) -> np.ndarray:
        return self.rows != self.cols

    @property
    def edges(self) -> list[EdgeRef]:
        return [EdgeRef(int(a), int(b), float(w)) for a, b, w in zip(self.rows, self.cols, self.weights)]

    @cached_property
    def _edge_lookup(self) -> dict:
        return {(int(a), int(b)): k for k, (a, b) in enumerate(zip(self.rows, self.cols))}

    def edge_position(self, i: int, j: int) -> int:
        """Index of edge ``(i, j)`` in the canonical arrays, or ``KeyError``."""
        a, b = (i, j) if i <= j else (j, i)
        try:
            return self._edge_lookup[(int(a), int(b))]
        except KeyError:
            raise KeyError(f"no edge ({i}, {j})") from None

    def edge(self, i: int, j: int) -> EdgeRef:
        k = self.edge_position(i, j)
        return EdgeRef(int(self.rows[k]), int(self.cols[k]), float(self.weights[k]))

    def has_edge(self, i: int, j: int) -> bool:
        a, b = (i, j) if i <= j else (j, i)
        return (int(a), int(b)) in self._edge_lookup

    def isolated_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.degrees <= 0)

    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes`` (kept in the given order)."""
        nodes = np.asarray(nodes, dtype=np.int64)
        index = np.full(self.n, -1, dtype=np.int64)
        index[nodes] = np.arange(nodes.size)
        keep = (index[self.rows] >= 0) & (index[self.cols] >= 0)
        return Graph.from_arrays(
            nodes.size, index[self.rows[keep]], index[self.cols[keep]], self.weights[keep],
            labels=self.labels[nodes],
        )

    def permuted(self, perm) -> "Graph":
        """Relabel so that new node ``k`` is old node ``perm[k]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(perm.size)
        return Graph.from_arrays(
            self.n, inv[self.rows], inv[self.cols], self.weights, labels=self.labels[perm]
        )

    def with_weights(self, weights) -> "Graph":
        return Graph.from_arrays(self.n, self.rows, self.cols, weights, labels=self.labels)

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.n_entries})"


# -- loaders ------------------------------------------------------------------


def _read_lines(path):
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputOutputError(f"cannot read {path}: {exc}") from exc


def load_edge_list(path, indexing: int = 1, n: int | None = None) -> Graph:
    """Read whitespace-separated ``i j [w]`` lines.

    Node ids are integers counted from ``indexing`` (0 or 1); the graph has
    ``max id - indexing + 1`` nodes unless ``n`` is given. Lines starting
    with ``#`` or ``%`` are comments.
    """
    if indexing not in (0, 1):
        raise ValidationError("indexing must be 0 or 1")
    ii, jj, ww = [], [], []
    for lineno, line in enumerate(_read_lines(path), start=1):
        text = line.strip()
        if not text or text[0] in "#%":
            continue
        parts = text.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'i j [w]', got {text!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"cannot parse {text!r}", lineno) from None
        if a < indexing or b < indexing:
            raise ParseError(f"node id below {indexing}", lineno)
        if not math.isfinite(w):
            raise ParseError(f"non-finite weight {parts[2]}", lineno)
        if w < 0:
            raise ValidationError(f"line {lineno}: negative weight {w}")
        ii.append(a - indexing)
        jj.append(b - indexing)
        ww.append(w)
    size = (max(max(ii), max(jj)) + 1) if ii else 0
    if n is not None:
        if n < size:
            raise ValidationError(f"n={n} is smaller than the largest node id")
        size = n
    labels = np.arange(size, dtype=np.int64) + indexing
    return Graph.from_arrays(size, ii, jj, ww, labels=labels)


def load_matrix_market(path) -> Graph:
    """Read a square real/integer/pattern MatrixMarket coordinate file.

    The header must declare ``symmetric``; the stored triangle is mirrored.
    Labels are 1-based, as in the file.
    """
    try:
        rows, cols, _, fmt, fld, symmetry = scipy.io.mminfo(str(path))
    except OSError as exc:
        raise InputOutputError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"not a MatrixMarket file: {exc}") from exc
    if fmt != "coordinate":
        raise ValidationError("only the coordinate MatrixMarket format is supported")
    if rows != cols:
        raise ValidationError(f"matrix must be square, got {rows}x{cols}")
    if fld == "complex":
        raise ValidationError("complex matrices are not supported")
    if symmetry != "symmetric":
        raise ValidationError(f"matrix must be symmetric, header says {symmetry!r}")
    M = sp.coo_matrix(scipy.io.mmread(str(path)))
    upper = M.row <= M.col
    w = np.asarray(M.data[upper], dtype=np.float64)
    if fld == "pattern":
        w = np.ones_like(w)
    if np.any(w < 0):
        raise ValidationError("negative weight in matrix")
    return Graph.from_arrays(rows, M.row[upper], M.col[upper], w, labels=np.arange(1, rows + 1))


def load_coordinates(path, graph: Graph) -> np.ndarray:
    """Read ``id x y`` lines into an ``(n, 2)`` array aligned with ``graph``.

    Nodes without a line get NaN coordinates.
    """
    position = {int(lab): k for k, lab in enumerate(graph.labels)}
    coords = np.full((graph.n, 2), np.nan)
    for lineno, line in enumerate(_read_lines(path), start=1):
        text = line.strip()
        if not text or text[0] in "#%":
            continue
        parts = text.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'id x y', got {text!r}", lineno)
        try:
            node, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"cannot parse {text!r}", lineno) from None
        if node in position:
            coords[position[node]] = (x, y)
    return coords


def assign_length_weights(graph: Graph, coords) -> Graph:
    """Replace each weight by ``exp(-length / max_length)``.

    ``coords`` is an ``(n, 2)`` array or a mapping from node label to an
    ``(x, y)`` pair. Lengths are Euclidean.
    """
    if graph.n_entries == 0:
        raise ValidationError("graph has no edges")
    if isinstance(coords, dict):
        missing = [lab for lab in graph.labels.tolist() if lab not in coords]
        if missing:
            raise ValidationError(f"missing coordinates for nodes {missing[:5]}")
        coords = np.array([coords[lab] for lab in graph.labels.tolist()], dtype=np.float64)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.shape != (graph.n, 2):
        raise ValidationError(f"coordinates must have shape ({graph.n}, 2)")
    used = np.unique(np.concatenate([graph.rows, graph.cols]))
    bad = used[~np.all(np.isfinite(coords[used]), axis=1)]
    if bad.size:
        raise ValidationError(f"missing coordinates for nodes {graph.labels[bad[:5]].tolist()}")
    length = np.hypot(*(coords[graph.rows] - coords[graph.cols]).T)
    lmax = length.max()
    w = np.exp(-length / lmax) if lmax > 0 else np.ones_like(length)
    return graph.with_weights(w)


# -- structure ----------------------------------------------------------------


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray
    count: int

    @property
    def node_sets(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(self.count + 1))
        return [order[bounds[c]:bounds[c + 1]] for c in range(self.count)]

    @property
    def connected(self) -> bool:
        return self.count == 1


def connected_components(graph: Graph) -> ComponentLabeling:
    if graph.n == 0:
        return ComponentLabeling(np.empty(0, dtype=np.int64), 0)
    count, labels = _cc(graph.adjacency, directed=False)
    return ComponentLabeling(labels.astype(np.int64), int(count))


@dataclass(frozen=True)
class BridgeStructure:
    """Bridges of a graph together with the node set each one cuts off.

    ``is_bridge`` is aligned with the graph's edge arrays. For a bridge at
    position ``k``, ``side(k)`` returns the nodes of the depth-first subtree
    hanging below it; the rest of the component lies on the other side.
    """

    is_bridge: np.ndarray
    child: np.ndarray
    preorder: np.ndarray
    subtree_size: np.ndarray
    order: np.ndarray

    def side(self, k: int) -> np.ndarray:
        c = self.child[k]
        start = self.preorder[c]
        return self.order[start:start + self.subtree_size[c]]

    @property
    def positions(self) -> np.ndarray:
        return np.flatnonzero(self.is_bridge)


def bridge_structure(graph: Graph) -> BridgeStructure:
    """Iterative depth-first bridge search with low-link values, O(n + m)."""
    n = graph.n
    A = graph.adjacency
    indptr, indices = A.indptr, A.indices
    pre = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    is_bridge = np.zeros(graph.n_entries, dtype=bool)
    child = np.full(graph.n_entries, -1, dtype=np.int64)
    counter = 0
    ptr = indptr[:-1].copy()
    for root in range(n):
        if pre[root] >= 0:
            continue
        pre[root] = low[root] = counter
        order[counter] = root
        counter += 1
        stack = [root]
        while stack:
            v = stack[-1]
            p = ptr[v]
            if p < indptr[v + 1]:
                ptr[v] = p + 1
                w = indices[p]
                if w == v or w == parent[v]:
                    continue
                if pre[w] < 0:
                    parent[w] = v
                    pre[w] = low[w] = counter
                    order[counter] = w
                    counter += 1
                    stack.append(w)
                elif pre[w] < low[v]:
                    low[v] = pre[w]
            else:
                stack.pop()
                u = parent[v]
                if u >= 0:
                    size[u] += size[v]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if low[v] > pre[u]:
                        k = graph.edge_position(int(u), int(v))
                        is_bridge[k] = True
                        child[k] = v
    return BridgeStructure(is_bridge, child, pre, size, order)


def find_bridges(graph: Graph) -> set[EdgeRef]:
    info = bridge_structure(graph)
    return {
        EdgeRef(int(graph.rows[k]), int(graph.cols[k]), float(graph.weights[k]))
        for k in info.positions
    }


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    """Block-diagonal union; nodes of ``g2`` are shifted by ``g1.n``."""
    return Graph.from_arrays(
        g1.n + g2.n,
        np.concatenate([g1.rows, g2.rows + g1.n]),
        np.concatenate([g1.cols, g2.cols + g1.n]),
        np.concatenate([g1.weights, g2.weights]),
        labels=np.arange(g1.n + g2.n, dtype=np.int64),
    )
