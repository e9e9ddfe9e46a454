import numpy as np
import pytest
import scipy.sparse as sp

from graphgen import fig1_left, grid, random_connected, random_with_bridges, two_node
from kemeny_centrality import FactorizationError, Graph, ParameterError, ValidationError, disjoint_union
from kemeny_centrality.linsolve import (
    apply_S_inverse,
    build_dense_workspace,
    build_system,
    build_workspace,
    cholesky_factorize,
    dense_inverse_pair,
    solve_T,
)


def test_two_node_system():
    s = build_system(two_node(), 0.0, dense=True)
    assert np.allclose(s.S_dense, [[1.5, -0.5], [-0.5, 1.5]])
    assert np.allclose(s.T.toarray(), [[1, -1], [-1, 1]])


def test_fig1_diagonal():
    T = build_system(fig1_left(), 1e-8).T
    assert np.array_equal(T.diagonal(), (1 + 1e-8) * np.array([2.0, 2.0, 3.0, 1.0]))


def test_zero_degree_named():
    g = Graph.from_edges(3, [(0, 1)], labels=[10, 20, 30])
    with pytest.raises(ValidationError, match="30"):
        build_system(g, 0.1)


def test_negative_r_rejected():
    with pytest.raises(ParameterError):
        build_system(fig1_left(), -1.0)


def test_factor_identity(kernels):
    f = cholesky_factorize(sp.identity(5, format="csc"), kernels=kernels)
    assert np.allclose(f.L.toarray(), np.eye(5))


def test_factor_two_by_two(kernels):
    f = cholesky_factorize(sp.csc_matrix([[4.0, 2.0], [2.0, 5.0]]), "natural", kernels=kernels)
    assert np.allclose(f.L.toarray(), [[2, 0], [1, 2]], rtol=0, atol=1e-15)


def test_factor_singular_laplacian(kernels):
    with pytest.raises(FactorizationError, match="r > 0"):
        cholesky_factorize(build_system(fig1_left(), 0.0).T, kernels=kernels)


def test_reconstruction(kernels, rng):
    for g in [random_connected(rng, 50), grid(8, 9), random_with_bridges(rng)]:
        T = build_system(g, 1e-8).T
        f = cholesky_factorize(T, kernels=kernels)
        Tp = T[f.perm][:, f.perm].toarray()
        L = f.L.toarray()
        assert np.max(np.abs(L @ L.T - Tp)) <= 1e-10 * np.max(np.abs(Tp))
        assert np.all(np.diag(L) > 0)


def test_disconnected_factorizes_with_r(kernels):
    g = disjoint_union(fig1_left(), two_node())
    f = cholesky_factorize(build_system(g, 1e-8).T, kernels=kernels)
    assert f.n == 6


def test_workspace_invariants(kernels, rng):
    g = random_connected(rng, 40)
    ws = build_workspace(g, 1e-2, kernels=kernels)
    d = g.degrees
    assert np.max(np.abs(ws.T @ ws.z - d)) <= 1e-8 * d.max()
    assert ws.gamma > 0
    dense_z = np.linalg.solve(ws.T.toarray(), d)
    assert ws.gamma == pytest.approx(d.sum() + d @ dense_z, rel=1e-10)


def test_workspace_rejects_zero_r():
    with pytest.raises(ParameterError):
        build_workspace(fig1_left(), 0.0)


def test_solve_T_examples(kernels):
    ws = build_workspace(fig1_left(), 1e-2, kernels=kernels)
    assert np.allclose(solve_T(ws, ws.T @ np.ones(4)), 1.0, atol=1e-12)
    assert np.array_equal(solve_T(ws, np.zeros(4)), np.zeros(4))
    b = np.array([1.0, -1.0, 0.0, 0.0])
    expected = np.linalg.solve(ws.T.toarray(), b)
    assert np.allclose(solve_T(ws, b), expected, rtol=0, atol=1e-10)
    assert np.allclose(solve_T(ws, b, refine=True), expected, rtol=0, atol=1e-10)


def test_solve_dimension_mismatch():
    ws = build_workspace(fig1_left(), 1e-2)
    with pytest.raises(ValidationError):
        solve_T(ws, np.ones(3))


def test_dense_two_node_apply():
    ws = build_dense_workspace(two_node(), 0.0)
    assert np.allclose(apply_S_inverse(ws, np.array([1.0, -1.0])), [0.5, -0.5], atol=1e-15)


def test_apply_S_inverse_of_d_is_ones(kernels, rng):
    g = random_connected(rng, 30)
    ws = build_workspace(g, 1e-8, kernels=kernels)
    S = ws.T.toarray() + np.outer(g.degrees, g.degrees) / g.total_degree
    x = apply_S_inverse(ws, g.degrees)
    assert np.allclose(x, np.linalg.solve(S, g.degrees), rtol=1e-10)
    # S 1 = (1 + r) d
    assert np.allclose(x, 1.0 / (1.0 + 1e-8), rtol=1e-10)


def test_apply_S_inverse_round_trip(kernels, rng):
    g = random_connected(rng, 50)
    ws = build_workspace(g, 1e-3, kernels=kernels)
    S = ws.T.toarray() + np.outer(g.degrees, g.degrees) / g.total_degree
    x = rng.normal(size=g.n)
    assert np.allclose(apply_S_inverse(ws, S @ x), x, rtol=0, atol=1e-8 * np.abs(x).max())


def test_sparse_and_dense_S_inverse_agree(kernels, rng):
    for _ in range(5):
        g = random_connected(rng, int(rng.integers(10, 200)))
        r = 1e-8
        ws = build_workspace(g, r, kernels=kernels)
        F, _ = dense_inverse_pair(build_system(g, r, dense=True).S_dense, g.degrees)
        V = rng.normal(size=(g.n, 4))
        got = apply_S_inverse(ws, V)
        want = F @ V
        assert np.linalg.norm(got - want) <= 1e-8 * np.linalg.norm(want)


def test_ordering_does_not_change_solution(kernels, rng):
    g = random_connected(rng, 60)
    b = rng.normal(size=g.n)
    ref = build_workspace(g, 1e-4, ordering="natural", kernels=kernels).apply_S_inverse(b)
    for ordering in ["minimum_degree", rng.permutation(g.n)]:
        x = build_workspace(g, 1e-4, ordering=ordering, kernels=kernels).apply_S_inverse(b)
        assert np.allclose(x, ref, rtol=0, atol=1e-10 * np.abs(ref).max())


def test_bad_ordering():
    with pytest.raises(ParameterError):
        build_workspace(fig1_left(), 1e-2, ordering=[0, 0, 1, 2])
    with pytest.raises(ParameterError):
        build_workspace(fig1_left(), 1e-2, ordering="metis")


def test_dense_inverse_pair_examples():
    F, Q = dense_inverse_pair(2 * np.eye(3), np.eye(3))
    assert np.allclose(F, 0.5 * np.eye(3)) and np.allclose(Q, 0.25 * np.eye(3))
    S = build_system(two_node(), 0.0, dense=True).S_dense
    F, _ = dense_inverse_pair(S, np.ones(2))
    assert np.allclose(F, [[0.75, 0.25], [0.25, 0.75]], atol=1e-15)


def test_dense_inverse_pair_fig1_columnwise():
    g = fig1_left()
    S = build_system(g, 0.0, dense=True).S_dense
    F, Q = dense_inverse_pair(S, g.degrees)
    cols = np.column_stack([np.linalg.solve(S, e) for e in np.eye(4)])
    assert np.allclose(F, cols, rtol=0, atol=1e-10)
    assert np.allclose(Q, cols @ np.diag(g.degrees) @ cols, rtol=0, atol=1e-10)
    # F^T D F and F D F coincide because F is symmetric
    assert np.allclose(F, F.T, rtol=0, atol=1e-13)
    assert np.allclose(Q, Q.T, rtol=0, atol=1e-13)
    assert np.all(np.linalg.eigvalsh(Q) > 0)


def test_dense_threshold():
    with pytest.raises(ParameterError, match="Cholesky"):
        dense_inverse_pair(np.eye(10), np.ones(10), threshold=5)
    with pytest.raises(ParameterError):
        build_dense_workspace(fig1_left(), 0.0, threshold=3)


def test_dense_workspace_disconnected_zero_r():
    g = disjoint_union(fig1_left(), two_node())
    ws = build_dense_workspace(g, 0.0)
    v = np.array([1.0, -1.0, 0, 0, 0, 0])
    x = ws.apply_S_inverse(v)
    assert np.allclose(ws.S @ x, v, atol=1e-13)
    assert np.allclose(x[4:], 0.0)
