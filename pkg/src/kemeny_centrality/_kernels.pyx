# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: ordering, sparse Cholesky and the per-edge solve loop.

Function-for-function twin of ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, threadid
from libc.math cimport sqrt, fabs
from libc.stdlib cimport calloc, free, malloc, qsort, realloc
from libc.string cimport memset

cnp.import_array()

ctypedef cnp.int64_t idx_t

BACKEND = "compiled"


cdef int _cmp_idx(const void* a, const void* b) noexcept nogil:
    cdef idx_t x = (<const idx_t*>a)[0]
    cdef idx_t y = (<const idx_t*>b)[0]
    return (x > y) - (x < y)


cdef inline void _bucket_insert(idx_t v, idx_t d, idx_t* head, idx_t* nxt,
                                idx_t* prv, idx_t* deg) noexcept nogil:
    cdef idx_t h = head[d]
    nxt[v] = h
    prv[v] = -1
    if h != -1:
        prv[h] = v
    head[d] = v
    deg[v] = d


cdef inline void _bucket_remove(idx_t v, idx_t* head, idx_t* nxt,
                                idx_t* prv, idx_t* deg) noexcept nogil:
    cdef idx_t p = prv[v]
    cdef idx_t q = nxt[v]
    if p != -1:
        nxt[p] = q
    else:
        head[deg[v]] = q
    if q != -1:
        prv[q] = p


def minimum_degree(const idx_t[::1] indptr, const idx_t[::1] indices, idx_t n):
    """Minimum-degree elimination order of a symmetric sparsity pattern."""
    perm_arr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] perm = perm_arr
    if n == 0:
        return perm_arr
    cdef idx_t** adj = <idx_t**>calloc(n, sizeof(idx_t*))
    cdef idx_t* alen = <idx_t*>calloc(n, sizeof(idx_t))
    cdef idx_t* acap = <idx_t*>calloc(n, sizeof(idx_t))
    cdef idx_t* deg = <idx_t*>calloc(n, sizeof(idx_t))
    cdef idx_t* head = <idx_t*>malloc((n + 1) * sizeof(idx_t))
    cdef idx_t* nxt = <idx_t*>malloc(n * sizeof(idx_t))
    cdef idx_t* prv = <idx_t*>malloc(n * sizeof(idx_t))
    cdef idx_t* mark = <idx_t*>calloc(n, sizeof(idx_t))
    cdef char* dead = <char*>calloc(n, sizeof(char))
    cdef idx_t* nb = <idx_t*>malloc(n * sizeof(idx_t))
    cdef idx_t v, u, x, p, k, t, s, cnt, step, mindeg = 0, stamp = 0, need
    cdef idx_t* buf
    if (adj == NULL or alen == NULL or acap == NULL or deg == NULL or head == NULL
            or nxt == NULL or prv == NULL or mark == NULL or dead == NULL or nb == NULL):
        raise MemoryError()
    try:
        with nogil:
            for v in range(n):
                cnt = 0
                for p in range(indptr[v], indptr[v + 1]):
                    if indices[p] != v:
                        cnt += 1
                acap[v] = cnt + 4
                adj[v] = <idx_t*>malloc(acap[v] * sizeof(idx_t))
                cnt = 0
                for p in range(indptr[v], indptr[v + 1]):
                    if indices[p] != v:
                        adj[v][cnt] = indices[p]
                        cnt += 1
                alen[v] = cnt
            for v in range(n + 1):
                head[v] = -1
            for v in range(n):
                _bucket_insert(v, alen[v], head, nxt, prv, deg)

            for step in range(n):
                while head[mindeg] == -1:
                    mindeg += 1
                v = head[mindeg]
                _bucket_remove(v, head, nxt, prv, deg)
                perm[step] = v
                dead[v] = 1
                k = 0
                for p in range(alen[v]):
                    x = adj[v][p]
                    if not dead[x]:
                        nb[k] = x
                        k += 1
                free(adj[v])
                adj[v] = NULL
                qsort(nb, k, sizeof(idx_t), _cmp_idx)
                if k == 1:
                    # v is a leaf: its neighbour only loses one entry; the
                    # stale slot is dropped the next time the list is rebuilt
                    u = nb[0]
                    _bucket_remove(u, head, nxt, prv, deg)
                    _bucket_insert(u, deg[u] - 1, head, nxt, prv, deg)
                    if deg[u] < mindeg:
                        mindeg = deg[u]
                    continue
                stamp += 1
                for t in range(k):
                    mark[nb[t]] = stamp
                for t in range(k):
                    u = nb[t]
                    need = alen[u] + k
                    if need > acap[u]:
                        acap[u] = 2 * need
                        buf = <idx_t*>realloc(adj[u], acap[u] * sizeof(idx_t))
                        if buf == NULL:
                            with gil:
                                raise MemoryError()
                        adj[u] = buf
                    cnt = 0
                    for p in range(alen[u]):
                        x = adj[u][p]
                        if dead[x] or mark[x] == stamp:
                            continue
                        adj[u][cnt] = x
                        cnt += 1
                    for s in range(k):
                        if nb[s] != u:
                            adj[u][cnt] = nb[s]
                            cnt += 1
                    alen[u] = cnt
                    _bucket_remove(u, head, nxt, prv, deg)
                    _bucket_insert(u, cnt, head, nxt, prv, deg)
                    if cnt < mindeg:
                        mindeg = cnt
    finally:
        for v in range(n):
            if adj[v] != NULL:
                free(adj[v])
        free(adj); free(alen); free(acap); free(deg); free(head)
        free(nxt); free(prv); free(mark); free(dead); free(nb)
    return perm_arr


def etree(const idx_t[::1] Cp, const idx_t[::1] Ci, idx_t n):
    """Elimination tree from the upper triangle (CSC) of a symmetric matrix."""
    parent_arr = np.full(n, -1, dtype=np.int64)
    ancestor_arr = np.full(n, -1, dtype=np.int64)
    cdef idx_t[::1] parent = parent_arr
    cdef idx_t[::1] ancestor = ancestor_arr
    cdef idx_t k, p, i, inext
    with nogil:
        for k in range(n):
            for p in range(Cp[k], Cp[k + 1]):
                i = Ci[p]
                while i != -1 and i < k:
                    inext = ancestor[i]
                    ancestor[i] = k
                    if inext == -1:
                        parent[i] = k
                    i = inext
    return parent_arr


cdef idx_t _ereach(const idx_t* Cp, const idx_t* Ci, idx_t k, const idx_t* parent,
                   idx_t* mark, idx_t* stack, idx_t n) noexcept nogil:
    # row pattern of L(k, :) in stack[top:n], topological order
    cdef idx_t top = n, p, i, length
    mark[k] = k
    for p in range(Cp[k], Cp[k + 1]):
        i = Ci[p]
        if i > k:
            continue
        length = 0
        while mark[i] != k:
            stack[length] = i
            length += 1
            mark[i] = k
            i = parent[i]
        while length > 0:
            top -= 1
            length -= 1
            stack[top] = stack[length]
    return top


def column_counts(const idx_t[::1] Cp, const idx_t[::1] Ci, const idx_t[::1] parent, idx_t n):
    counts_arr = np.ones(n, dtype=np.int64)
    cdef idx_t[::1] counts = counts_arr
    cdef idx_t* mark = <idx_t*>malloc(max(n, 1) * sizeof(idx_t))
    cdef idx_t* stack = <idx_t*>malloc(max(n, 1) * sizeof(idx_t))
    cdef idx_t k, top, s
    if mark == NULL or stack == NULL:
        free(mark); free(stack)
        raise MemoryError()
    with nogil:
        for k in range(n):
            mark[k] = -1
        for k in range(n):
            top = _ereach(&Cp[0], &Ci[0], k, &parent[0], mark, stack, n)
            for s in range(top, n):
                counts[stack[s]] += 1
    free(mark)
    free(stack)
    return counts_arr


def cholesky_numeric(const idx_t[::1] Cp, const idx_t[::1] Ci, const double[::1] Cx,
                     const idx_t[::1] parent, const idx_t[::1] Lp, double pivot_tol):
    """Up-looking Cholesky; returns ``(Li, Lx, failed_column)``."""
    cdef idx_t n = parent.shape[0]
    cdef idx_t nnz = Lp[n]
    Li_arr = np.zeros(nnz, dtype=np.int64)
    Lx_arr = np.zeros(nnz, dtype=np.float64)
    cdef idx_t[::1] Li = Li_arr
    cdef double[::1] Lx = Lx_arr
    cdef idx_t* fill = <idx_t*>malloc(max(n, 1) * sizeof(idx_t))
    cdef idx_t* mark = <idx_t*>malloc(max(n, 1) * sizeof(idx_t))
    cdef idx_t* stack = <idx_t*>malloc(max(n, 1) * sizeof(idx_t))
    cdef double* x = <double*>calloc(max(n, 1), sizeof(double))
    cdef idx_t k, p, i, top, s, failed = -1
    cdef double d, akk, lki
    if fill == NULL or mark == NULL or stack == NULL or x == NULL:
        free(fill); free(mark); free(stack); free(x)
        raise MemoryError()
    with nogil:
        for k in range(n):
            fill[k] = Lp[k]
            mark[k] = -1
        for k in range(n):
            top = _ereach(&Cp[0], &Ci[0], k, &parent[0], mark, stack, n)
            akk = 0.0
            for p in range(Cp[k], Cp[k + 1]):
                i = Ci[p]
                if i < k:
                    x[i] = Cx[p]
                elif i == k:
                    akk = Cx[p]
            d = akk
            for s in range(top, n):
                i = stack[s]
                lki = x[i] / Lx[Lp[i]]
                x[i] = 0.0
                for p in range(Lp[i] + 1, fill[i]):
                    x[Li[p]] -= Lx[p] * lki
                d -= lki * lki
                Li[fill[i]] = k
                Lx[fill[i]] = lki
                fill[i] += 1
            if not d > pivot_tol * fabs(akk):
                failed = k
                break
            Li[fill[k]] = k
            Lx[fill[k]] = sqrt(d)
            fill[k] += 1
    free(fill); free(mark); free(stack); free(x)
    return Li_arr, Lx_arr, failed


def lsolve_block(const idx_t[::1] Lp, const idx_t[::1] Li, const double[::1] Lx,
                 double[:, ::1] B):
    """Solve ``L Y = B`` in place; ``B`` has shape ``(n, k)``."""
    cdef idx_t n = B.shape[0], k = B.shape[1], c, p, t, r
    cdef double diag, l
    with nogil:
        for c in range(n):
            diag = Lx[Lp[c]]
            for t in range(k):
                B[c, t] /= diag
            for p in range(Lp[c] + 1, Lp[c + 1]):
                r = Li[p]
                l = Lx[p]
                for t in range(k):
                    B[r, t] -= l * B[c, t]


def ltsolve_block(const idx_t[::1] Lp, const idx_t[::1] Li, const double[::1] Lx,
                  double[:, ::1] B):
    """Solve ``L^T Y = B`` in place."""
    cdef idx_t n = B.shape[0], k = B.shape[1], c, p, t, r
    cdef double diag, l
    with nogil:
        for c in range(n - 1, -1, -1):
            for p in range(Lp[c] + 1, Lp[c + 1]):
                r = Li[p]
                l = Lx[p]
                for t in range(k):
                    B[c, t] -= l * B[r, t]
            diag = Lx[Lp[c]]
            for t in range(k):
                B[c, t] /= diag


cdef void _edge_block(idx_t n, idx_t kb, idx_t bs,
                      const idx_t* Lp, const idx_t* Li, const double* Lx,
                      const idx_t* parent, const idx_t* root,
                      const idx_t* pp, const idx_t* qq, const double* wgt,
                      const double* dp, const double* zp, const double* ydp,
                      const double* root_dzz, double dzz_total, double gamma,
                      double* W, idx_t* path, idx_t* roots, char* touched,
                      double* coef, double* bacc,
                      double* alpha, double* beta) noexcept nogil:
    cdef idx_t t, c, c0, s, lp, idx, p, q, nroots = 0
    cdef double yc, delta, l, inv, zc, dc, w, xv, rest
    cdef double* Wc
    cdef const double* Wr
    memset(W, 0, n * bs * sizeof(double))
    for t in range(kb):
        p = pp[t]
        q = qq[t]
        # (p, q) is an entry of T, so the higher index lies on the other's
        # elimination-tree path and L^{-1}(e_p - e_q) lives on that path
        c0 = p if p < q else q
        lp = 0
        c = c0
        while c != -1:
            path[lp] = c
            lp += 1
            c = parent[c]
        W[p * bs + t] = 1.0
        W[q * bs + t] = -1.0
        delta = 0.0
        for s in range(lp):
            c = path[s]
            yc = W[c * bs + t] / Lx[Lp[c]]
            W[c * bs + t] = yc
            delta += ydp[c] * yc
            if yc != 0.0:
                for idx in range(Lp[c] + 1, Lp[c + 1]):
                    W[Li[idx] * bs + t] -= Lx[idx] * yc
        coef[t] = delta / gamma
        bacc[t] = 0.0
        c = root[c0]
        if not touched[c]:
            touched[c] = 1
            roots[nroots] = c
            nroots += 1

    for c in range(n - 1, -1, -1):
        if not touched[root[c]]:
            continue
        Wc = W + c * bs
        for idx in range(Lp[c] + 1, Lp[c + 1]):
            l = Lx[idx]
            Wr = W + Li[idx] * bs
            for t in range(kb):
                Wc[t] -= l * Wr[t]
        inv = 1.0 / Lx[Lp[c]]
        zc = zp[c]
        dc = dp[c]
        for t in range(kb):
            w = Wc[t] * inv
            Wc[t] = w
            xv = w - coef[t] * zc
            bacc[t] += dc * xv * xv

    # trees of the factor forest untouched by this block have w = 0 there
    rest = dzz_total
    for s in range(nroots):
        rest -= root_dzz[roots[s]]
        touched[roots[s]] = 0
    for t in range(kb):
        p = pp[t]
        q = qq[t]
        alpha[t] = wgt[t] * ((W[p * bs + t] - coef[t] * zp[p]) - (W[q * bs + t] - coef[t] * zp[q]))
        beta[t] = wgt[t] * (bacc[t] + coef[t] * coef[t] * rest)


def edge_alpha_beta(const idx_t[::1] Lp, const idx_t[::1] Li, const double[::1] Lx,
                    const idx_t[::1] parent, const idx_t[::1] root,
                    const idx_t[::1] p_idx, const idx_t[::1] q_idx, const double[::1] weight,
                    const double[::1] dp, const double[::1] zp, const double[::1] ydp,
                    double gamma, int block=32, int nthreads=1):
    """Loop-replacement diagnostics for many edges; see the Python twin."""
    cdef idx_t n = parent.shape[0]
    cdef idx_t m = p_idx.shape[0]
    alpha_arr = np.empty(m, dtype=np.float64)
    beta_arr = np.empty(m, dtype=np.float64)
    if m == 0:
        return alpha_arr, beta_arr
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] beta = beta_arr
    root_dzz_arr = np.zeros(n, dtype=np.float64)
    np.add.at(root_dzz_arr, np.asarray(root), np.asarray(dp) * np.asarray(zp) ** 2)
    cdef double[::1] root_dzz = root_dzz_arr
    cdef double dzz_total = float(root_dzz_arr.sum())
    cdef idx_t bs = block
    cdef idx_t nblocks = (m + bs - 1) // bs
    cdef idx_t b, e0, kb
    cdef int tid
    if nthreads < 1:
        nthreads = 1
    work_arr = np.empty(nthreads * n * bs, dtype=np.float64)
    path_arr = np.empty(nthreads * n, dtype=np.int64)
    roots_arr = np.empty(nthreads * bs, dtype=np.int64)
    touched_arr = np.zeros(nthreads * n, dtype=np.int8)
    coef_arr = np.empty(nthreads * bs, dtype=np.float64)
    bacc_arr = np.empty(nthreads * bs, dtype=np.float64)
    cdef double[::1] work = work_arr
    cdef idx_t[::1] path = path_arr
    cdef idx_t[::1] roots = roots_arr
    cdef cnp.int8_t[::1] touched = touched_arr
    cdef double[::1] coef = coef_arr
    cdef double[::1] bacc = bacc_arr
    for b in prange(nblocks, nogil=True, num_threads=nthreads, schedule="dynamic"):
        tid = threadid()
        e0 = b * bs
        kb = m - e0
        if kb > bs:
            kb = bs
        _edge_block(n, kb, bs, &Lp[0], &Li[0], &Lx[0], &parent[0], &root[0],
                    &p_idx[e0], &q_idx[e0], &weight[e0], &dp[0], &zp[0], &ydp[0],
                    &root_dzz[0], dzz_total, gamma,
                    &work[tid * n * bs], &path[tid * n], &roots[tid * bs],
                    <char*>&touched[tid * n], &coef[tid * bs], &bacc[tid * bs],
                    &alpha[e0], &beta[e0])
    return alpha_arr, beta_arr
