import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SQRT2, dense_laplacian, haar_oracle, random_involution, random_symmetric_graph
from fastgft.decompose import (
    HaarStage,
    block_laplacian,
    conjugated_laplacian,
    decompose,
    even_odd_components,
    haar_stage,
    haar_stage_matrix,
    split_components,
)
from fastgft.gallery import cycle_graph, get_entry
from fastgft.graph import Graph, graph_from_laplacian, laplacian
from fastgft.symmetry import partition

C4 = cycle_graph(4)
R = 1 / SQRT2


def off_block(M, part):
    plus = list(part.vx + part.vz)
    minus = list(part.vy)
    return np.abs(M[np.ix_(plus, minus)]).max(initial=0.0)


def test_haar_matrix_examples():
    assert np.allclose(haar_stage_matrix(haar_stage((1, 0))), [[R, R], [R, -R]], atol=0)
    B31 = np.array([[R, 0, R], [0, 1, 0], [R, 0, -R]])
    assert np.array_equal(haar_stage_matrix(HaarStage(3, ((0, 2),), (1,))), B31)
    B42 = np.array([[R, 0, 0, R], [0, R, R, 0], [0, R, -R, 0], [R, 0, 0, -R]])
    assert np.array_equal(haar_stage_matrix(haar_stage((3, 2, 1, 0))), B42)
    with pytest.raises(ValueError):
        HaarStage(3, ((0, 1),), ())


@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_haar_matrix_orthogonal_and_matches_oracle(seed, n):
    phi = random_involution(np.random.default_rng(seed), n)
    B = haar_stage_matrix(haar_stage(phi))
    assert np.array_equal(B, haar_oracle(n, phi))
    assert np.abs(B.T @ B - np.eye(n)).max() <= 1e-14
    assert np.array_equal(B, B.T)


def test_conjugated_laplacian_c4():
    phi = (3, 2, 1, 0)
    M = conjugated_laplacian(laplacian(C4), haar_stage(phi))
    order = [0, 1, 3, 2]
    blocks = np.zeros((4, 4))
    blocks[:2, :2] = [[1, -1], [-1, 1]]
    blocks[2:, 2:] = [[3, -1], [-1, 3]]
    assert np.allclose(M[np.ix_(order, order)], blocks, atol=1e-15)


def test_conjugated_laplacian_identity_and_asymmetric():
    L = laplacian(C4)
    assert np.array_equal(conjugated_laplacian(L, haar_stage(range(4))), L)
    g = Graph(4, {(0, 1): 1.3, (1, 2): 1.0, (2, 3): 1.0, (0, 3): 1.0})
    phi = (3, 2, 1, 0)
    M = conjugated_laplacian(laplacian(g), haar_stage(phi))
    assert off_block(M, partition(phi)) > 0.1


def test_decompose_c4():
    res = decompose(C4, (3, 2, 1, 0))
    assert res.g_plus.edges == {(0, 1): 1.0} and res.g_plus.self_loops == (0.0, 0.0)
    assert res.minus_nodes == (3, 2)
    assert res.g_minus.edges == {(0, 1): 1.0}
    assert np.allclose(res.g_minus.self_loops, (2.0, 2.0), atol=1e-15)
    oracle = graph_from_laplacian(conjugated_laplacian(laplacian(C4), res.stage)[np.ix_([3, 2], [3, 2])])
    assert res.g_minus.isclose(oracle)


def test_decompose_with_fixed_nodes():
    # X = {0}, Y = {3}, Z = {1, 2}; symmetric edges of weight d into a shared Z node
    c, d, e = 0.7, 1.9, 0.4
    g = Graph(4, {(0, 1): d, (1, 3): d, (1, 2): c, (0, 3): e})
    res = decompose(g, (3, 1, 2, 0))
    assert res.plus_nodes == (0, 1, 2) and res.minus_nodes == (3,)
    assert res.g_plus.edges == {(0, 1): pytest.approx(SQRT2 * d), (1, 2): c}
    assert res.g_plus.self_loops[0] == pytest.approx(-(SQRT2 - 1) * d)
    assert res.g_plus.self_loops[1] == pytest.approx((2 - SQRT2) * d)
    assert res.g_minus.self_loops == pytest.approx((2 * e + d,))
    M = conjugated_laplacian(laplacian(g), res.stage)
    assert np.allclose(block_laplacian(res), M, atol=1e-14)


def test_decompose_isolated_pair_edge():
    b = 2.5
    res = decompose(Graph(2, {(0, 1): b}), (1, 0))
    assert res.g_plus.edges == {} and res.g_plus.self_loops == (0.0,)
    assert res.g_minus.self_loops == (2 * b,)


def test_decompose_rejects_asymmetric():
    g = Graph(3, {(0, 1): 1.0, (1, 2): 2.0})
    with pytest.raises(ValueError):
        decompose(g, (2, 1, 0))


def test_decompose_drops_cancelled_edges():
    # X-X edge equal to its cross partner cancels in the difference graph
    res = decompose(C4, (2, 3, 0, 1))
    assert res.g_minus.edges == {}


def test_closed_form_matches_conjugation_on_random_corpus():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        g, phi = random_symmetric_graph(rng, n, density=rng.uniform(0.2, 0.9), negative=True)
        res = decompose(g, phi)
        B = haar_oracle(n, phi)
        M = B.T @ dense_laplacian(g) @ B
        order = list(res.order)
        blocks = np.zeros((n, n))
        k = res.g_plus.n
        blocks[:k, :k] = laplacian(res.g_plus)
        blocks[k:, k:] = laplacian(res.g_minus)
        worst = max(worst, np.abs(M[np.ix_(order, order)] - blocks).max())
    assert worst <= 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 20))
def test_off_blocks_vanish_iff_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    g, phi = random_symmetric_graph(rng, n, density=0.7)
    part = partition(phi)
    L = laplacian(g)
    scale = np.abs(L).sum(axis=1).max()
    assert off_block(conjugated_laplacian(L, haar_stage(phi)), part) <= 1e-12 * scale
    # perturb one weight by 1% in a way that breaks the symmetry
    keys = [k for k in g.edges if tuple(sorted((phi[k[0]], phi[k[1]]))) != k]
    if not keys:
        return
    key = keys[int(rng.integers(len(keys)))]
    edges = dict(g.edges)
    edges[key] *= 1.01
    L2 = laplacian(Graph(n, edges, g.self_loops))
    assert off_block(conjugated_laplacian(L2, haar_stage(phi)), part) > 1e-12 * scale


@given(st.integers(0, 2**32 - 1), st.integers(2, 16))
def test_spectrum_preserved(seed, n):
    rng = np.random.default_rng(seed)
    g, phi = random_symmetric_graph(rng, n)
    res = decompose(g, phi)
    sub = np.concatenate([np.linalg.eigvalsh(laplacian(res.g_plus)), np.linalg.eigvalsh(laplacian(res.g_minus))])
    assert np.allclose(np.sort(sub), np.linalg.eigvalsh(laplacian(g)), atol=1e-8)


def test_even_odd_c4_example():
    phi = (3, 2, 1, 0)
    x = np.array([1.0, 2.0, 3.0, 4.0])
    y = haar_oracle(4, phi).T @ x
    assert np.allclose(y[[0, 1]], [5 * R, 5 * R])
    assert np.allclose(y[[3, 2]], [-3 * R, -1 * R])
    even, odd = even_odd_components(x, phi)
    assert np.allclose(even, [2.5, 2.5, 2.5, 2.5])
    assert np.allclose(odd, [-1.5, -0.5, 0.5, 1.5])


@given(st.integers(0, 2**32 - 1), st.integers(1, 15))
def test_even_odd_properties(seed, n):
    rng = np.random.default_rng(seed)
    phi = random_involution(rng, n)
    x = rng.normal(size=n)
    even, odd = even_odd_components(x, phi)
    p = list(phi)
    assert np.abs(even + odd - x).max() <= 1e-12
    assert np.abs(even - even[p]).max() <= 1e-12
    assert np.abs(odd + odd[p]).max() <= 1e-12
    fixed = [i for i in range(n) if phi[i] == i]
    assert np.all(odd[fixed] == 0)
    sym = (x + x[p]) / 2
    assert np.abs(even_odd_components(sym, phi)[1]).max() <= 1e-12
    anti = (x - x[p]) / 2
    assert np.abs(even_odd_components(anti, phi)[0]).max() <= 1e-12


def test_split_components():
    res = decompose(get_entry("skeleton15").graph, get_entry("skeleton15").known_involutions["mirror"])
    assert len(split_components(res.g_minus)) == 2
    assert len(split_components(C4)) == 1
    comps = split_components(Graph(3))
    assert [nodes for _, nodes in comps] == [(0,), (1,), (2,)]
    g = Graph(5, {(0, 3): 2.0, (1, 4): 1.0}, (0, 0, 7.0, 0, 0))
    comps = split_components(g)
    assert [nodes for _, nodes in comps] == [(0, 3), (1, 4), (2,)]
    assert comps[0][0].edges == {(0, 1): 2.0}
    assert comps[2][0].self_loops == (7.0,)
