"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line; the lines are
repeated in the pytest terminal summary. Run standalone with
``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from graphgen import (
    barbell,
    fig1_left,
    fig1_right,
    grid,
    random_connected,
    random_tree,
    random_with_bridges,
)
from kemeny_centrality import (
    INFINITY,
    EdgeScorer,
    RegularizationConfig,
    deletion_score,
    disjoint_union,
    edge_scores,
    kemeny_eig,
    kemeny_trace,
    loop_score,
    score_curve,
    transition_spectrum,
)
from kemeny_centrality.oracle import kemeny_mfpt, kemeny_spectrum_oracle, loop_modified_adjacency

SEED = 7


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny), initial=0.0))


def bridge_graphs():
    rng = np.random.default_rng(SEED + 5)
    trees = [random_tree(rng, int(rng.integers(2, 40))) for _ in range(50)]
    others = [random_with_bridges(rng, blocks=int(rng.integers(2, 5))) for _ in range(50)]
    return trees + others


def barbell_pair():
    return barbell(6, 1), barbell(5, 3)


def test_criterion_01_fig1_reproduction():
    t0 = time.perf_counter()
    k_left = kemeny_trace(fig1_left()).value
    k_right = kemeny_trace(fig1_right()).value
    c = deletion_score(fig1_left(), (0, 1)).score
    elapsed = time.perf_counter() - t0
    errs = [abs(k_left - 61 / 24), abs(k_right - 2.5), abs(c + 1 / 24)]
    ok = max(errs) <= 1e-10 and elapsed < 1.0
    report(1, ok, f"K(left)={k_left:.12f} K(right)={k_right:.12f} c(1,2)={c:.12f} "
                  f"max abs err {max(errs):.1e} (tol 1e-10), {elapsed:.3f}s (<1s)")


def test_criterion_02_braess_fix():
    g = fig1_left()
    c = deletion_score(g, (0, 1)).score
    loops = [loop_score(g, (e.i, e.j)).score for e in g.edges]
    finite = [s for s in loops if s is not INFINITY]
    ok = c < 0 and all(s >= -1e-10 for s in finite)
    report(2, ok, f"deletion(1,2)={c:.6g} < 0; loop scores "
                  f"{['inf' if s is INFINITY else round(s, 6) for s in loops]} >= -1e-10")


def test_criterion_03_triple_oracle():
    rng = np.random.default_rng(SEED + 3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        g = random_connected(rng, int(rng.integers(3, 101)))
        k = kemeny_trace(g).value
        others = [kemeny_eig(g).value, kemeny_spectrum_oracle(g), kemeny_mfpt(g)]
        worst = max(worst, rel_err(others, [k] * 3))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 60
    report(3, ok, f"100 graphs, max relative disagreement {worst:.1e} (tol 1e-9), "
                  f"{elapsed:.1f}s (<60s)")


def test_criterion_04_dense_sparse_equivalence():
    rng = np.random.default_rng(SEED + 4)
    cfg = RegularizationConfig(1e-8)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(50):
        n = int(rng.integers(10, 201))
        g = random_connected(rng, n) if k % 2 else random_with_bridges(
            rng, blocks=int(rng.integers(2, 6)), size=(4, max(5, n // 4)))
        for measure in ("regularized", "filtered"):
            dense = edge_scores(g, measure, cfg, algorithm="dense").score
            sparse = edge_scores(g, measure, cfg, algorithm="cholesky").score
            worst = max(worst, rel_err(sparse, dense))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 120
    report(4, ok, f"50 graphs, max relative difference {worst:.1e} (tol 1e-8), "
                  f"{elapsed:.1f}s (<120s)")


def test_criterion_05_cut_edge_bound():
    worst_ratio, worst_filtered, n_bridges = 0.0, np.inf, 0
    for g in bridge_graphs():
        for r in (1e-4, 1e-8):
            cfg = RegularizationConfig(r)
            reg = edge_scores(g, "regularized", cfg)
            fil = edge_scores(g, "filtered", cfg)
            cut = reg.is_cut_edge
            n_bridges += int(cut.sum())
            if cut.any():
                worst_ratio = max(worst_ratio, float(np.max(reg.score[cut] * r)))
            worst_filtered = min(worst_filtered, float(fil.score.min()))
    ok = worst_ratio <= 1 + 1e-6 and worst_filtered >= -1e-10
    report(5, ok, f"{n_bridges} bridge evaluations, max r*c_r={worst_ratio:.12f} (<=1+1e-6), "
                  f"min filtered {worst_filtered:.3g} (>=-1e-10)")


def test_criterion_06_filtered_limit():
    rng = np.random.default_rng(SEED + 6)
    checked, violations = 0, 0
    for k in range(20):
        g = random_with_bridges(rng) if k % 2 else random_connected(rng, int(rng.integers(5, 60)))
        exact = edge_scores(g, "loop", r=0.0)
        gaps = []
        for r in (1e-4, 1e-6, 1e-8):
            t = edge_scores(g, "filtered", RegularizationConfig(r))
            keep = ~t.is_cut_edge
            gaps.append(np.abs(t.score[keep] - exact.score[keep]))
        gaps = np.array(gaps)
        checked += gaps.shape[1]
        violations += int(np.sum(~((gaps[0] > gaps[1]) & (gaps[1] > gaps[2]))))
    report(6, violations == 0, f"{checked} non-cut edges, {violations} non-monotone gap sequences")


def test_criterion_07_disjoint_union():
    g1, g2 = barbell_pair()
    u = disjoint_union(g1, g2)
    cfg = RegularizationConfig(1e-8)
    worst = 0.0
    for alg in ("dense", "cholesky"):
        parts = np.concatenate([edge_scores(g, "filtered", cfg, algorithm=alg).score for g in (g1, g2)])
        whole = edge_scores(u, "filtered", cfg, algorithm=alg).score
        worst = max(worst, rel_err(whole, parts))
    report(7, worst <= 1e-8, f"union of two barbells, max relative difference {worst:.1e} (tol 1e-8)")


def test_criterion_08_heuristic_classification():
    cfg = RegularizationConfig(1e-8, "heuristic_threshold")
    graphs = bridge_graphs() + list(barbell_pair()) + [disjoint_union(*barbell_pair())]
    mismatched = 0
    for g in graphs:
        t = edge_scores(g, "filtered", cfg)
        exact = EdgeScorer(g).bridges.is_bridge[t.positions]
        mismatched += int(np.sum(t.is_cut_edge != exact))
    report(8, mismatched == 0, f"{len(graphs)} graphs, {mismatched} edges where c_r > 1/(2r) "
                               "disagrees with the bridge set")


def test_criterion_09_derivative_bound():
    rng = np.random.default_rng(SEED + 9)
    h = 1e-6
    worst_low, worst_slack, count = np.inf, np.inf, 0
    for _ in range(20):
        g = random_connected(rng, int(rng.integers(3, 41)))
        lam = transition_spectrum(g).eigenvalues
        tail = np.sum((1.0 - lam[1:]) ** -2)
        d = g.degrees
        for e in g.edges:
            f0 = score_curve(g, (e.i, e.j), 0.0)
            fd = (score_curve(g, (e.i, e.j), h) - f0) / h
            bound = e.weight * (1 / d[e.i] + 1 / d[e.j]) * tail
            worst_low = min(worst_low, fd)
            worst_slack = min(worst_slack, bound + 1e-4 - fd)
            count += 1
    ok = worst_low >= -1e-6 and worst_slack >= 0
    report(9, ok, f"{count} edges, min difference quotient {worst_low:.3g} (>=-1e-6), "
                  f"min slack to bound {worst_slack:.3g} (>=0)")


def test_criterion_10_interlacing():
    rng = np.random.default_rng(SEED + 10)
    worst_mono, worst_inter, count = np.inf, np.inf, 0
    for _ in range(20):
        g = random_connected(rng, int(rng.integers(3, 31)))
        d = g.degrees
        s = 1.0 / np.sqrt(d)
        lam = transition_spectrum(g).eigenvalues
        for e in g.edges:
            A_hat = loop_modified_adjacency(g, e.i, e.j)
            lam_hat = np.sort(np.linalg.eigvalsh(A_hat * s[:, None] * s[None, :]))[::-1]
            worst_mono = min(worst_mono, float(np.min(lam_hat - lam)))
            worst_inter = min(worst_inter, float(np.min(lam[:-1] - lam_hat[1:])))
            count += 1
    ok = worst_mono >= -1e-12 and worst_inter >= -1e-12
    report(10, ok, f"{count} loop updates, min(lam_hat - lam)={worst_mono:.2e}, "
                   f"min(lam_l - lam_hat_l+1)={worst_inter:.2e} (>= -1e-12)")


@pytest.mark.slow
def test_criterion_11_grid_scale():
    g = grid(300, 300)
    t0 = time.perf_counter()
    t = edge_scores(g, "filtered", RegularizationConfig(1e-8), algorithm="cholesky", threads=0)
    elapsed = time.perf_counter() - t0
    ok = (len(t) == g.n_entries and np.all(np.isfinite(t.score)) and np.all(t.score >= 0)
          and elapsed < 1800)
    report(11, ok, f"300x300 grid, {len(t)} edges, scores in [{t.score.min():.4g}, "
                   f"{t.score.max():.4g}], {elapsed / 60:.1f} min (<30 min)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
