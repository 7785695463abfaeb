import numpy as np
import pytest

from conftest import dct2, max_sign_aligned_dev
from fastgft.decompose import decompose, split_components
from fastgft.gallery import (
    BENCHMARK_GRAPHS,
    GalleryEntry,
    complete_graph,
    cycle_graph,
    gallery,
    get_entry,
    grid_graph,
    grid_involution,
    line_graph,
    skeleton_graph,
    star_graph,
)
from fastgft.graph import Graph, laplacian
from fastgft.spectral import gft
from fastgft.symmetry import is_involution, is_phi_symmetric, p_phi, search_involutions_tree


def rev(n):
    return tuple(range(n - 1, -1, -1))


def swap(n, i, j):
    phi = list(range(n))
    phi[i], phi[j] = j, i
    return tuple(phi)


def test_every_entry_involution_valid():
    for entry in gallery().values():
        for phi in entry.known_involutions.values():
            assert is_involution(phi)
            assert is_phi_symmetric(entry.graph, phi, tol=0.0)


def test_entry_rejects_false_involution():
    with pytest.raises(ValueError):
        GalleryEntry("bad", line_graph([1.0, 2.0]), {"reversal": (2, 1, 0)})


def test_line_examples():
    assert is_phi_symmetric(line_graph([1.0] * 7), rev(8))
    assert is_phi_symmetric(line_graph([1.0, 2.0, 2.0, 1.0]), rev(5))
    assert not is_phi_symmetric(line_graph([1.0, 2.0]), rev(3))
    g = line_graph([1.0, 1.0], self_loops=[0.5, 0.0, 0.5])
    assert g.self_loops == (0.5, 0.0, 0.5) and is_phi_symmetric(g, rev(3))


def test_uniform_line_is_dct():
    for n in (4, 8, 11):
        U = gft(line_graph([1.0] * (n - 1))).eigenvectors
        assert max_sign_aligned_dev(U, dct2(n).T) <= 1e-9


def test_cycle_examples():
    entry = get_entry("cycle12")
    assert entry.known_involutions["reversal"] == rev(12)
    assert np.allclose(gft(cycle_graph(4)).eigenvalues, [0, 2, 2, 4], atol=1e-12)
    # reflection through node 0
    assert is_phi_symmetric(cycle_graph(3), (0, 2, 1))
    with pytest.raises(ValueError):
        cycle_graph(2)


def test_star_and_complete_examples():
    star = star_graph(4)
    for i in range(1, 4):
        for j in range(i + 1, 4):
            assert is_phi_symmetric(star, swap(4, i, j))
    assert not is_phi_symmetric(star, swap(4, 0, 1))
    k4 = complete_graph(4)
    for i in range(4):
        for j in range(i + 1, 4):
            assert is_phi_symmetric(k4, swap(4, i, j))
    assert complete_graph(2).edges == {(0, 1): 1.0}
    assert is_phi_symmetric(complete_graph(2), (1, 0))


def test_grid_involution_examples():
    # row-major flat index k * N + l
    assert grid_involution("lr", 2) == (1, 0, 3, 2)
    assert grid_involution("diagonal", 2) == (0, 2, 1, 3)
    ud = grid_involution("ud", 3)
    assert all(ud[i] == i for i in (3, 4, 5))
    assert ud[:3] == (6, 7, 8)
    assert grid_involution("centrosymmetry", 2) == (3, 2, 1, 0)
    assert grid_involution("antidiagonal", 2) == (3, 1, 2, 0)
    for kind in ("lr", "ud", "diagonal", "antidiagonal", "centrosymmetry"):
        assert is_involution(grid_involution(kind, 5))
    with pytest.raises(ValueError):
        grid_involution("spiral", 3)


def test_grid_examples():
    g = grid_graph("bidiag6", 4, a=0.5)
    assert is_phi_symmetric(g, grid_involution("diagonal", 4))
    assert is_phi_symmetric(g, grid_involution("antidiagonal", 4))
    assert not is_phi_symmetric(g, grid_involution("lr", 4))
    z = grid_graph("zshaped", 4, w=2.0)
    assert is_phi_symmetric(z, grid_involution("centrosymmetry", 4))
    rng = np.random.default_rng(0)
    noisy = Graph(16, {k: rng.uniform(0.5, 3.0) for k in z.edges})
    assert not is_phi_symmetric(noisy, grid_involution("centrosymmetry", 4))
    with pytest.raises(ValueError):
        grid_graph("hex", 4)
    with pytest.raises(ValueError):
        grid_graph("zshaped", 1)


def test_grids_have_distinct_eigenvalues():
    for name in ("bidiag8x8", "zshaped8x8"):
        lam = np.linalg.eigvalsh(laplacian(get_entry(name).graph))
        assert np.diff(lam).min() > 1e-6


def test_skeleton15():
    g = skeleton_graph(15)
    assert g.num_edges == 14
    assert search_involutions_tree(g)  # is a tree
    phi = get_entry("skeleton15").known_involutions["mirror"]
    assert is_phi_symmetric(g, phi) and p_phi(phi) == 6
    res = decompose(g, phi)
    assert len(split_components(res.g_minus)) == 2


def test_skeleton25():
    g = skeleton_graph(25)
    assert g.num_edges == 24 and len(split_components(g)) == 1
    phi = get_entry("skeleton25").known_involutions["mirror"]
    assert is_phi_symmetric(g, phi) and p_phi(phi) == 10
    with pytest.raises(ValueError):
        skeleton_graph(20)


def test_benchmark_graphs_and_references():
    assert len(BENCHMARK_GRAPHS) == 8
    sizes = {name: get_entry(name).graph.n for name in BENCHMARK_GRAPHS}
    assert sizes == {
        "cycle12": 12, "cycle80": 80, "bidiag4x4": 16, "bidiag8x8": 64,
        "zshaped4x4": 16, "zshaped8x8": 64, "skeleton15": 15, "skeleton25": 25,
    }
    for name in BENCHMARK_GRAPHS:
        entry = get_entry(name)
        n = entry.graph.n
        assert entry.reference_ops[0] == (n * (n - 1), n * n)
        assert 0 < entry.reference_reduction < 1
    with pytest.raises(KeyError):
        get_entry("nope")
