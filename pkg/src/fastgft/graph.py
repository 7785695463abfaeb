"""Undirected weighted graphs with self-loops and their Laplacians.

Nodes are 0-based. Edge weights live in a sparse ``{(i, j): w}`` map with
``i < j``; self-loop weights are kept in a separate per-node tuple and never
appear as edges. Zero weights mean "no edge" and are dropped on construction.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

import numpy as np

__all__ = [
    "Graph",
    "Bipartition",
    "laplacian",
    "graph_from_laplacian",
    "normalized_laplacian",
    "is_bipartite",
    "is_k_regular_bipartite",
    "quadratic_form",
    "graph_to_dict",
    "graph_from_dict",
    "load_graph",
    "save_graph",
    "WEIGHT_RTOL",
]

#: Relative tolerance used when comparing weights for equality.
WEIGHT_RTOL = 1e-12


def weights_close(a: float, b: float, rtol: float = WEIGHT_RTOL) -> bool:
    """Compare two weights with a relative tolerance (absolute near zero)."""
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : mapping
        ``{(i, j): w}``; either orientation is accepted and normalized to
        ``i < j``. Duplicate orientations of the same edge are an error.
    self_loops : sequence of float, optional
        Per-node self-loop weight, default all zero.
    """

    n: int
    edges: Mapping[tuple[int, int], float] = field(default_factory=dict)
    self_loops: tuple[float, ...] = ()

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise ValueError("node count must be nonnegative")
        clean: dict[tuple[int, int], float] = {}
        for (i, j), w in dict(self.edges).items():
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ValueError(f"edge ({i}, {i}) is a self-loop; use self_loops")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            key = (i, j) if i < j else (j, i)
            if key in clean:
                raise ValueError(f"edge {key} given twice")
            if w != 0.0:
                clean[key] = w
        loops = tuple(float(s) for s in self.self_loops) if self.self_loops else (0.0,) * n
        if len(loops) != n:
            raise ValueError(f"expected {n} self-loop weights, got {len(loops)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", dict(sorted(clean.items())))
        object.__setattr__(self, "self_loops", loops)

    def __hash__(self):
        return hash((self.n, tuple(self.edges.items()), self.self_loops))

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return self.self_loops[i]
        return self.edges.get((i, j) if i < j else (j, i), 0.0)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense weight matrix W with zero diagonal."""
        W = np.zeros((self.n, self.n))
        for (i, j), w in self.edges.items():
            W[i, j] = W[j, i] = w
        W.flags.writeable = False
        return W

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Weighted degrees, self-loops excluded."""
        d = np.zeros(self.n)
        for (i, j), w in self.edges.items():
            d[i] += w
            d[j] += w
        d.flags.writeable = False
        return d

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_self_loops(self) -> bool:
        return any(s != 0.0 for s in self.self_loops)

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph, relabelled in the order of ``nodes``."""
        nodes = list(nodes)
        index = {v: k for k, v in enumerate(nodes)}
        edges = {
            (index[i], index[j]): w
            for (i, j), w in self.edges.items()
            if i in index and j in index
        }
        return Graph(len(nodes), edges, tuple(self.self_loops[v] for v in nodes))

    def permuted(self, order: Iterable[int]) -> "Graph":
        """Relabel so that new node ``k`` is old node ``order[k]``."""
        order = list(order)
        if sorted(order) != list(range(self.n)):
            raise ValueError("order must be a permutation of all nodes")
        return self.subgraph(order)

    def isclose(self, other: "Graph", rtol: float = WEIGHT_RTOL) -> bool:
        if self.n != other.n:
            return False
        for key in set(self.edges) | set(other.edges):
            if not weights_close(self.edges.get(key, 0.0), other.edges.get(key, 0.0), rtol):
                return False
        return all(weights_close(a, b, rtol) for a, b in zip(self.self_loops, other.self_loops))


@dataclass(frozen=True)
class Bipartition:
    """Two disjoint node sets covering the graph; every edge crosses them."""

    s1: tuple[int, ...]
    s2: tuple[int, ...]


def laplacian(g: Graph) -> np.ndarray:
    """L = D - W + S as a dense symmetric matrix."""
    L = np.zeros((g.n, g.n))
    diag = np.array(g.self_loops, dtype=float)
    for (i, j), w in g.edges.items():
        L[i, j] = L[j, i] = -w
        diag[i] += w
        diag[j] += w
    L[np.diag_indices(g.n)] = diag
    return L


def graph_from_laplacian(L, tol: float = 1e-12) -> Graph:
    """Recover edge and self-loop weights from a Laplacian.

    ``w_ij = -l_ij`` off the diagonal and ``s_i`` is the i-th row sum.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("Laplacian must be square")
    scale = max(1.0, float(np.abs(L).max(initial=0.0)))
    if not np.allclose(L, L.T, rtol=0.0, atol=tol * scale):
        raise ValueError("Laplacian is not symmetric")
    n = L.shape[0]
    edges = {}
    loops = []
    for i in range(n):
        off = 0.0
        for j in range(n):
            if j != i:
                off += L[i, j]
            if j > i and L[i, j] != 0.0:
                edges[(i, j)] = -L[i, j]
        # accumulate in the same order laplacian() does so dyadic weights round-trip exactly
        loops.append(L[i, i] + off)
    return Graph(n, edges, tuple(loops))


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Symmetric normalized Laplacian D^{-1/2} L D^{-1/2}."""
    d = np.asarray(g.degrees)
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise ValueError(f"node {bad} has nonpositive degree")
    r = 1.0 / np.sqrt(d)
    return laplacian(g) * r[:, None] * r[None, :]


def _two_coloring(g: Graph) -> Optional[list[int]]:
    color = [-1] * g.n
    for start in range(g.n):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in g.neighbors[v]:
                if color[u] == -1:
                    color[u] = 1 - color[v]
                    queue.append(u)
                elif color[u] == color[v]:
                    return None
    return color


def is_bipartite(g: Graph) -> Optional[Bipartition]:
    """BFS two-coloring over nonzero edges; ``None`` if an odd cycle exists.

    Self-loops are node weights here and do not affect bipartiteness.
    """
    color = _two_coloring(g)
    if color is None:
        return None
    s1 = tuple(v for v in range(g.n) if color[v] == 0)
    s2 = tuple(v for v in range(g.n) if color[v] == 1)
    return Bipartition(s1, s2)


def is_k_regular_bipartite(
    g: Graph, rtol: float = WEIGHT_RTOL
) -> Optional[tuple[Bipartition, float]]:
    """Return ``(parts, k)`` for a k-regular bipartite graph with equal parts.

    Graphs with nonzero self-loops are rejected since the eigenvalue pairing
    ``lambda -> 2k - lambda`` needs ``L = kI - W``.
    """
    if g.n == 0 or g.n % 2 or g.has_self_loops():
        return None
    parts = is_bipartite(g)
    if parts is None or len(parts.s1) != len(parts.s2):
        return None
    d = g.degrees
    k = float(d[0])
    if not all(weights_close(float(x), k, rtol) for x in d):
        return None
    return parts, k


def quadratic_form(L, f, g: Optional[Graph] = None) -> float:
    """Signal variation f^T L f.

    With ``g`` given, evaluates the edge/self-loop sum instead of the dense
    product; the two agree for ``L = laplacian(g)``.
    """
    f = np.asarray(f, dtype=float)
    L = np.asarray(L, dtype=float)
    if L.shape != (f.size, f.size):
        raise ValueError(f"signal length {f.size} does not match Laplacian {L.shape}")
    if g is None:
        return float(f @ L @ f)
    if g.n != f.size:
        raise ValueError("graph and signal size differ")
    total = math.fsum(w * (f[i] - f[j]) ** 2 for (i, j), w in g.edges.items())
    return total + math.fsum(s * f[k] ** 2 for k, s in enumerate(g.self_loops))


def graph_to_dict(g: Graph) -> dict:
    return {
        "n": g.n,
        "edges": [[i, j, w] for (i, j), w in g.edges.items()],
        "self_loops": [[i, s] for i, s in enumerate(g.self_loops) if s != 0.0],
    }


def graph_from_dict(data: Mapping) -> Graph:
    try:
        n = int(data["n"])
        edges = {}
        for i, j, w in data.get("edges", []):
            key = (int(i), int(j)) if i < j else (int(j), int(i))
            if key in edges:
                raise ValueError(f"edge {key} listed twice")
            edges[key] = float(w)
        loops = [0.0] * n
        for i, s in data.get("self_loops", []):
            loops[int(i)] = float(s)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed graph JSON: {exc}") from exc
    return Graph(n, edges, tuple(loops))


def load_graph(path) -> Graph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def save_graph(g: Graph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(g), fh, indent=1)
        fh.write("\n")
