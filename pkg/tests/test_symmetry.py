import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_involutions, random_graph, random_symmetric_graph
from fastgft.gallery import cycle_graph, get_entry, line_graph, star_graph
from fastgft.graph import Graph
from fastgft.symmetry import (
    involution_count,
    involution_from_dict,
    involution_to_dict,
    is_involution,
    is_phi_symmetric,
    iter_involutions,
    p_phi,
    partition,
    search_involutions,
    search_involutions_tree,
)

C4 = cycle_graph(4)


def brute_symmetries(g: Graph) -> set:
    ident = tuple(range(g.n))
    W = g.adjacency
    s = np.asarray(g.self_loops)
    out = set()
    for phi in brute_involutions(g.n):
        p = list(phi)
        if phi != ident and np.array_equal(W[np.ix_(p, p)], W) and np.array_equal(s[p], s):
            out.add(phi)
    return out


def test_is_involution_examples():
    assert is_involution((3, 1, 2, 0))
    assert is_involution(tuple(range(6)))
    assert not is_involution((1, 2, 0))
    with pytest.raises(ValueError):
        is_involution((0, 0, 1))


def test_is_phi_symmetric_examples():
    assert is_phi_symmetric(C4, (3, 2, 1, 0))
    assert not is_phi_symmetric(C4, (1, 0, 2, 3))
    g = Graph(2, {(0, 1): 1.0}, (1.0, 0.0))
    assert not is_phi_symmetric(g, (1, 0))
    assert is_phi_symmetric(Graph(2, {(0, 1): 1.0}), (1, 0))


def test_is_phi_symmetric_relative_tolerance():
    g = Graph(3, {(0, 1): 1.0, (1, 2): 1.0 + 1e-14})
    assert is_phi_symmetric(g, (2, 1, 0))
    h = Graph(3, {(0, 1): 1.0, (1, 2): 1.0 + 1e-6})
    assert not is_phi_symmetric(h, (2, 1, 0))


def test_partition_examples():
    part = partition((3, 2, 1, 0))
    assert (part.vx, part.vy, part.vz, part.p) == ((0, 1), (3, 2), (), 2)
    part = partition((3, 1, 2, 0))
    assert (part.vx, part.vy, part.vz, part.p) == ((0,), (3,), (1, 2), 1)
    part = partition(tuple(range(5)))
    assert part.vz == tuple(range(5)) and part.p == 0
    with pytest.raises(ValueError):
        partition((1, 2, 0))


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_partition_properties(seed, n):
    from conftest import random_involution

    phi = random_involution(np.random.default_rng(seed), n)
    part = partition(phi)
    assert sorted(part.vx + part.vy + part.vz) == list(range(n))
    assert len(part.vx) == len(part.vy) == p_phi(phi)
    assert all(phi[x] == y and x < y for x, y in part.pairs)
    assert all(phi[z] == z for z in part.vz)


def test_search_examples():
    found = search_involutions(C4)
    reflections = {(3, 2, 1, 0), (1, 0, 3, 2), (0, 3, 2, 1), (2, 1, 0, 3)}
    assert reflections | {(2, 3, 0, 1)} <= set(found)
    assert len(found) >= 5
    assert not found.truncated

    star = star_graph(4)
    found = set(search_involutions(star))
    for i, j in itertools.combinations(range(1, 4), 2):
        phi = list(range(4))
        phi[i], phi[j] = j, i
        assert tuple(phi) in found

    assert list(search_involutions(line_graph([1.0, 2.0]))) == []


def test_search_sorted_by_haar_count_then_lex():
    found = search_involutions(cycle_graph(6))
    keys = [(-p_phi(phi), phi) for phi in found]
    assert keys == sorted(keys)


def test_search_includes_reversal_on_c12():
    found = search_involutions(get_entry("cycle12").graph)
    assert tuple(range(11, -1, -1)) in set(found)
    assert all(is_phi_symmetric(get_entry("cycle12").graph, phi) for phi in found)


def test_search_budget_truncates():
    found = search_involutions(cycle_graph(12), budget=5)
    assert found.truncated


@given(st.integers(0, 2**32 - 1), st.integers(1, 7), st.sampled_from([0.3, 0.6, 1.0]))
def test_search_matches_brute_force_on_symmetric_graphs(seed, n, density):
    rng = np.random.default_rng(seed)
    if n >= 2:
        g, _ = random_symmetric_graph(rng, n, density=density)
    else:
        g = Graph(1)
    # round weights so symmetry classes are exact
    g = Graph(n, {k: round(v, 1) or 0.5 for k, v in g.edges.items()}, tuple(round(s, 1) for s in g.self_loops))
    assert set(search_involutions(g, budget=None)) == brute_symmetries(g)


@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_search_matches_brute_force_on_unit_graphs(seed, n):
    rng = np.random.default_rng(seed)
    g = Graph(n, {k: 1.0 for k in random_graph(rng, n, density=0.5).edges})
    assert set(search_involutions(g, budget=None)) == brute_symmetries(g)


def test_tree_search_skeletons():
    for name in ("skeleton15", "skeleton25"):
        entry = get_entry(name)
        found = search_involutions_tree(entry.graph)
        assert entry.known_involutions["mirror"] in found
        assert all(is_phi_symmetric(entry.graph, phi) for phi in found)


def test_tree_search_examples():
    assert (4, 3, 2, 1, 0) in search_involutions_tree(line_graph([1.0] * 4))
    # bicentral path: halves swapped across the central edge
    assert (5, 4, 3, 2, 1, 0) in search_involutions_tree(line_graph([1.0] * 5))
    assert search_involutions_tree(line_graph([1.0, 2.0, 3.0])) == []
    with pytest.raises(ValueError):
        search_involutions_tree(C4)


@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_tree_search_is_sound_and_finds_branch_swaps(seed, n):
    rng = np.random.default_rng(seed)
    parent = [int(rng.integers(0, v)) for v in range(1, n)]
    g = Graph(n, {(p, v + 1): 1.0 for v, p in enumerate(parent)})
    found = search_involutions_tree(g)
    truth = brute_symmetries(g)
    assert set(found) <= truth
    assert bool(found) == bool(truth)


def test_involution_count():
    assert [involution_count(n) for n in range(6)] == [1, 1, 2, 4, 10, 26]
    brute = sum(1 for perm in itertools.permutations(range(4)) if all(perm[perm[i]] == i for i in range(4)))
    assert involution_count(4) == brute
    assert involution_count(30) == sum(
        math.factorial(30) // (2**k * math.factorial(30 - 2 * k) * math.factorial(k)) for k in range(16)
    )
    for n in range(8):
        assert len(list(iter_involutions(n))) == involution_count(n)
    with pytest.raises(ValueError):
        involution_count(-1)


def test_involution_json():
    assert involution_to_dict((1, 0, 2)) == {"phi": [1, 0, 2]}
    assert involution_from_dict({"phi": [1, 0, 2]}) == (1, 0, 2)
    with pytest.raises(ValueError):
        involution_from_dict({"phi": [1, 2, 0]})
