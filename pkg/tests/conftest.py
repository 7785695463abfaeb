"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fastgft.graph import Graph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SQRT2 = np.sqrt(2.0)


def random_involution(rng: np.random.Generator, n: int, min_pairs: int = 0) -> tuple[int, ...]:
    """Uniform random pairing of a random number of node pairs."""
    order = rng.permutation(n)
    p = int(rng.integers(min(min_pairs, n // 2), n // 2 + 1))
    phi = list(range(n))
    for k in range(p):
        a, b = int(order[2 * k]), int(order[2 * k + 1])
        phi[a], phi[b] = b, a
    return tuple(phi)


def random_symmetric_graph(
    rng: np.random.Generator,
    n: int,
    phi=None,
    density: float = 0.5,
    loops: bool = True,
    negative: bool = False,
) -> tuple[Graph, tuple[int, ...]]:
    """Random graph made symmetric under ``phi`` by giving each edge orbit one weight."""
    if phi is None:
        phi = random_involution(rng, n, min_pairs=1)
    edges = {}
    for i, j in itertools.combinations(range(n), 2):
        key = (i, j)
        partner = tuple(sorted((phi[i], phi[j])))
        if partner < key:
            # one weight per edge orbit, drawn at its smaller member
            edges[key] = edges[partner]
            continue
        edges[key] = 0.0
        if rng.random() < density:
            w = rng.uniform(0.1, 2.0)
            if negative and rng.random() < 0.2:
                w = -w
            edges[key] = w
    edges = {k: v for k, v in edges.items() if v}
    s = np.zeros(n)
    if loops:
        for i in range(n):
            if i <= phi[i] and rng.random() < 0.3:
                s[i] = s[phi[i]] = rng.uniform(0.1, 1.0)
    return Graph(n, edges, tuple(s)), tuple(phi)


def random_graph(rng: np.random.Generator, n: int, density: float = 0.5) -> Graph:
    edges = {
        (i, j): rng.uniform(0.1, 2.0)
        for i, j in itertools.combinations(range(n), 2)
        if rng.random() < density
    }
    return Graph(n, edges)


def brute_involutions(n: int):
    """Every involution of n points from the full symmetric group."""
    for perm in itertools.permutations(range(n)):
        if all(perm[perm[i]] == i for i in range(n)):
            yield perm


def dense_laplacian(g: Graph) -> np.ndarray:
    """Laplacian built entry by entry, independent of the package routine."""
    L = np.diag(np.asarray(g.self_loops, dtype=float))
    for (i, j), w in g.edges.items():
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def haar_oracle(n: int, phi) -> np.ndarray:
    """Butterfly B_phi: sum on the lower node of each pair, difference on the upper."""
    B = np.eye(n)
    for i in range(n):
        j = phi[i]
        if i < j:
            B[i, i] = B[i, j] = B[j, i] = 1 / SQRT2
            B[j, j] = -1 / SQRT2
    return B


def dct2(N: int) -> np.ndarray:
    """Orthonormal DCT-II, rows are basis vectors."""
    k = np.arange(N)[:, None]
    m = np.arange(N)[None, :]
    C = np.sqrt(2.0 / N) * np.cos(np.pi * (m + 0.5) * k / N)
    C[0] /= SQRT2
    return C


def dst4(N: int) -> np.ndarray:
    k = np.arange(N)[:, None]
    m = np.arange(N)[None, :]
    return np.sqrt(2.0 / N) * np.sin(np.pi * (m + 0.5) * (k + 0.5) / N)


def match_up_to_sign_perm(U: np.ndarray, T: np.ndarray) -> float:
    """Max deviation between the columns of U and the rows of T up to sign and order.

    Returns infinity when no one-to-one matching exists.
    """
    G = T @ U
    rows = np.argmax(np.abs(G), axis=0)
    if len(set(rows.tolist())) != U.shape[1]:
        return np.inf
    signs = np.sign(G[rows, np.arange(U.shape[1])])
    return float(np.abs(U * signs - T[rows].T).max())


def max_sign_aligned_dev(A: np.ndarray, B: np.ndarray) -> float:
    """Column-wise max deviation after flipping each column of A to match B."""
    s = np.sign(np.sum(A * B, axis=0))
    s[s == 0] = 1.0
    return float(np.abs(A * s - B).max())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_results", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
