"""Compiled kernels against the pure-Python fallback.

Times the three hot stages on a square grid graph: minimum-degree ordering,
numeric Cholesky factorization, and the per-edge alpha/beta loop (on a
sample of edges, since the Python loop is slow).

    python benchmarks/bench_kernels.py --side 60 --edges 400
"""

import argparse
import time

import numpy as np

from kemeny_centrality import Graph
from kemeny_centrality._backend import available
from kemeny_centrality.linsolve import build_system, build_workspace


def grid(side):
    idx = np.arange(side * side).reshape(side, side)
    i = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    j = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return Graph.from_arrays(side * side, i, j)


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(kernels, g, r, n_edges, block, threads, repeat):
    T = build_system(g, r).T.tocsr()
    indptr, indices = T.indptr.astype(np.int64), T.indices.astype(np.int64)
    t_order, _ = timed(lambda: kernels.minimum_degree(indptr, indices, g.n), repeat)
    t_factor, ws = timed(lambda: build_workspace(g, r, kernels=kernels), repeat)
    f = ws.factor
    dp, zp = ws.permuted
    rng = np.random.default_rng(0)
    pick = np.sort(rng.choice(g.n_entries, size=min(n_edges, g.n_entries), replace=False))
    p = np.ascontiguousarray(f.pinv[g.rows[pick]])
    q = np.ascontiguousarray(f.pinv[g.cols[pick]])
    w = np.ascontiguousarray(g.weights[pick])
    t_edges, (alpha, beta) = timed(
        lambda: kernels.edge_alpha_beta(f.Lp, f.Li, f.Lx, f.parent, f.root, p, q, w,
                                        dp, zp, ws.y, ws.gamma, block, threads),
        repeat,
    )
    return {
        "ordering_s": t_order,
        "factor_s": t_factor,
        "per_edge_ms": 1e3 * t_edges / pick.size,
        "nnz_L": f.nnz,
        "result": (alpha, beta),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=60, help="grid side length")
    ap.add_argument("--edges", type=int, default=400, help="edges sampled for the per-edge loop")
    ap.add_argument("--reg", type=float, default=1e-8)
    ap.add_argument("--block", type=int, default=16)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    g = grid(args.side)
    print(f"grid {args.side}x{args.side}: n={g.n}, m={g.n_entries}, r={args.reg}, "
          f"block={args.block}, threads={args.threads}")
    rows = {}
    for name, kernels in sorted(available().items()):
        rows[name] = bench(kernels, g, args.reg, args.edges, args.block, args.threads, args.repeat)
    print(f"{'backend':<10}{'ordering s':>12}{'factor s':>12}{'ms / edge':>12}{'nnz(L)':>12}")
    for name, row in rows.items():
        print(f"{name:<10}{row['ordering_s']:>12.4f}{row['factor_s']:>12.4f}"
              f"{row['per_edge_ms']:>12.4f}{row['nnz_L']:>12d}")
    if len(rows) == 2:
        a, b = rows["compiled"], rows["python"]
        diff = max(np.max(np.abs(x - y) / np.abs(y)) for x, y in zip(a["result"], b["result"]))
        print(f"speedup  ordering {b['ordering_s'] / a['ordering_s']:.1f}x, "
              f"factor {b['factor_s'] / a['factor_s']:.1f}x, "
              f"edges {b['per_edge_ms'] / a['per_edge_ms']:.1f}x; "
              f"max relative difference in alpha/beta {diff:.1e}")
        est = a["per_edge_ms"] * g.n_entries / 1e3
        print(f"projected all-edge time with compiled kernels: {est:.1f} s")


if __name__ == "__main__":
    main()
