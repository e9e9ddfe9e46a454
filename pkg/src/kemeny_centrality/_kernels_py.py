"""Pure-Python kernels, used when the compiled extension is unavailable.

Each function mirrors the one of the same name in ``_kernels.pyx``; the
minimum-degree ordering reproduces the compiled tie-breaking exactly, so both
backends return the same permutation.
"""

import numpy as np

BACKEND = "python"


def minimum_degree(indptr, indices, n):
    """Minimum-degree elimination order of a symmetric sparsity pattern.

    Eliminates on the explicit elimination graph. Ties go to the node most
    recently (re)inserted into its degree bucket.
    """
    n = int(n)
    adj = [set() for _ in range(n)]
    for v in range(n):
        for u in indices[indptr[v]:indptr[v + 1]]:
            u = int(u)
            if u != v:
                adj[v].add(u)
    head = [-1] * (n + 1)
    nxt = [-1] * n
    prv = [-1] * n
    deg = [len(a) for a in adj]

    def insert(v, d):
        h = head[d]
        nxt[v] = h
        prv[v] = -1
        if h != -1:
            prv[h] = v
        head[d] = v
        deg[v] = d

    def remove(v):
        p, q = prv[v], nxt[v]
        if p != -1:
            nxt[p] = q
        else:
            head[deg[v]] = q
        if q != -1:
            prv[q] = p

    for v in range(n):
        insert(v, deg[v])
    perm = np.empty(n, dtype=np.int64)
    mindeg = 0
    for step in range(n):
        while head[mindeg] == -1:
            mindeg += 1
        v = head[mindeg]
        remove(v)
        perm[step] = v
        nb = sorted(adj[v])
        adj[v] = None
        if len(nb) == 1:
            u = nb[0]
            adj[u].discard(v)
            remove(u)
            insert(u, deg[u] - 1)
            mindeg = min(mindeg, deg[u])
            continue
        for u in nb:
            a = adj[u]
            a.discard(v)
            a.update(nb)
            a.discard(u)
            remove(u)
            insert(u, len(a))
            mindeg = min(mindeg, len(a))
    return perm


def etree(Cp, Ci, n):
    """Elimination tree from the upper triangle (CSC) of a symmetric matrix."""
    parent = np.full(n, -1, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        for p in range(Cp[k], Cp[k + 1]):
            i = Ci[p]
            while i != -1 and i < k:
                inext = ancestor[i]
                ancestor[i] = k
                if inext == -1:
                    parent[i] = k
                i = inext
    return parent


def _ereach(Cp, Ci, k, parent, mark, stamp):
    # pattern of row k of L (excluding the diagonal), topologically ordered
    pattern = []
    mark[k] = stamp
    for p in range(Cp[k], Cp[k + 1]):
        i = Ci[p]
        if i > k:
            continue
        chain = []
        while mark[i] != stamp:
            chain.append(i)
            mark[i] = stamp
            i = parent[i]
        pattern.extend(reversed(chain))
    return pattern[::-1]


def column_counts(Cp, Ci, parent, n):
    counts = np.ones(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        for j in _ereach(Cp, Ci, k, parent, mark, k):
            counts[j] += 1
    return counts


def cholesky_numeric(Cp, Ci, Cx, parent, Lp, pivot_tol):
    """Up-looking Cholesky; returns ``(Li, Lx, failed_column)``.

    ``failed_column`` is -1 on success, otherwise the first column whose
    pivot dropped below ``pivot_tol`` times the matching diagonal entry.
    """
    n = parent.size
    nnz = int(Lp[n])
    Li = np.zeros(nnz, dtype=np.int64)
    Lx = np.zeros(nnz)
    fill = Lp[:-1].copy()
    x = np.zeros(n)
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        pattern = _ereach(Cp, Ci, k, parent, mark, k)
        akk = 0.0
        for p in range(Cp[k], Cp[k + 1]):
            i = Ci[p]
            if i < k:
                x[i] = Cx[p]
            elif i == k:
                akk = Cx[p]
        d = akk
        for i in pattern:
            lki = x[i] / Lx[Lp[i]]
            x[i] = 0.0
            for p in range(Lp[i] + 1, fill[i]):
                x[Li[p]] -= Lx[p] * lki
            d -= lki * lki
            Li[fill[i]] = k
            Lx[fill[i]] = lki
            fill[i] += 1
        if not d > pivot_tol * abs(akk):
            return Li, Lx, k
        Li[fill[k]] = k
        Lx[fill[k]] = np.sqrt(d)
        fill[k] += 1
    return Li, Lx, -1


def lsolve_block(Lp, Li, Lx, B):
    """Solve ``L Y = B`` in place; ``B`` has shape ``(n, k)``."""
    for c in range(B.shape[0]):
        s, e = Lp[c], Lp[c + 1]
        B[c] /= Lx[s]
        if e > s + 1:
            B[Li[s + 1:e]] -= np.outer(Lx[s + 1:e], B[c])


def ltsolve_block(Lp, Li, Lx, B):
    """Solve ``L^T Y = B`` in place."""
    for c in range(B.shape[0] - 1, -1, -1):
        s, e = Lp[c], Lp[c + 1]
        if e > s + 1:
            B[c] -= Lx[s + 1:e] @ B[Li[s + 1:e]]
        B[c] /= Lx[s]


def edge_alpha_beta(Lp, Li, Lx, parent, root, p_idx, q_idx, weight,
                    dp, zp, ydp, gamma, block=32, nthreads=1):
    """Loop-replacement diagnostics for many edges at once.

    All vectors live in the permuted ordering of the factor. For each edge
    ``(p, q)`` this forms ``x = w - (d.w / gamma) z`` with ``w = T^{-1} v``
    and returns ``alpha = a (x_p - x_q)`` and ``beta = a x^T D x``.
    """
    n = parent.size
    m = p_idx.size
    alpha = np.empty(m)
    beta = np.empty(m)
    for e0 in range(0, m, block):
        p = p_idx[e0:e0 + block]
        q = q_idx[e0:e0 + block]
        kb = p.size
        cols = np.arange(kb)
        W = np.zeros((n, kb))
        W[p, cols] = 1.0
        W[q, cols] = -1.0
        lsolve_block(Lp, Li, Lx, W)
        coef = (ydp @ W) / gamma
        ltsolve_block(Lp, Li, Lx, W)
        X = W - np.outer(zp, coef)
        alpha[e0:e0 + kb] = weight[e0:e0 + kb] * (X[p, cols] - X[q, cols])
        beta[e0:e0 + kb] = weight[e0:e0 + kb] * (dp @ (X * X))
    return alpha, beta
