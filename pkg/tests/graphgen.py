"""Graph families used across the test suite."""

import numpy as np

from kemeny_centrality import Graph, disjoint_union


def fig1_left():
    # nodes 1..4 of the Braess example, stored 0-based
    return Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)], labels=[1, 2, 3, 4])


def fig1_right():
    return Graph.from_edges(4, [(0, 2), (1, 2), (2, 3)], labels=[1, 2, 3, 4])


def two_node(w=1.0):
    return Graph.from_edges(2, [(0, 1, w)])


def complete(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, k) for k in range(1, leaves + 1)])


def barbell(m, bridge_len=1, w=1.0):
    """Two cliques ``K_m`` joined by a path of ``bridge_len`` edges."""
    edges = []
    for off in (0, m + bridge_len - 1):
        edges += [(off + i, off + j, w) for i in range(m) for j in range(i + 1, m)]
    chain = [m - 1] + list(range(m, m + bridge_len - 1)) + [m + bridge_len - 1]
    edges += [(a, b, w) for a, b in zip(chain[:-1], chain[1:])]
    return Graph.from_edges(2 * m + bridge_len - 1, edges)


def grid(rows, cols):
    idx = np.arange(rows * cols).reshape(rows, cols)
    i = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    j = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return Graph.from_arrays(rows * cols, i, j)


def random_connected(rng, n, extra=None, wmin=0.5, wmax=2.0, weighted=True):
    """Random spanning tree plus ``extra`` chords, with random weights."""
    if extra is None:
        extra = int(rng.integers(n // 2, 2 * n + 1))
    edges = {}
    perm = rng.permutation(n)
    for k in range(1, n):
        a, b = perm[k], perm[int(rng.integers(0, k))]
        edges[(min(a, b), max(a, b))] = 1.0
    for _ in range(extra):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges[(min(a, b), max(a, b))] = 1.0
    keys = list(edges)
    w = rng.uniform(wmin, wmax, size=len(keys)) if weighted else np.ones(len(keys))
    return Graph.from_edges(n, [(a, b, x) for (a, b), x in zip(keys, w)])


def random_tree(rng, n, weighted=True):
    return random_connected(rng, n, extra=0, weighted=weighted)


def random_with_bridges(rng, blocks=3, size=(4, 9), pendants=3):
    """Dense blocks chained by bridges, with a few pendant paths."""
    parts = [random_connected(rng, int(rng.integers(*size)), extra=None) for _ in range(blocks)]
    g = parts[0]
    starts = [0]
    for p in parts[1:]:
        starts.append(g.n)
        g = disjoint_union(g, p)
    i, j, w = list(g.rows), list(g.cols), list(g.weights)
    for k in range(1, blocks):
        a = starts[k - 1] + int(rng.integers(0, parts[k - 1].n))
        b = starts[k] + int(rng.integers(0, parts[k].n))
        i.append(a)
        j.append(b)
        w.append(rng.uniform(0.5, 2.0))
    n = g.n
    for _ in range(pendants):
        anchor = int(rng.integers(0, n))
        length = int(rng.integers(1, 3))
        for _ in range(length):
            i.append(anchor)
            j.append(n)
            w.append(rng.uniform(0.5, 2.0))
            anchor = n
            n += 1
    return Graph.from_arrays(n, i, j, w)
