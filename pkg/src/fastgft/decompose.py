"""Haar butterfly stages and the symmetric graph decomposition.

For a graph symmetric under ``phi`` the orthogonal butterfly ``B_phi``
block-diagonalizes the Laplacian into a part on the "sum" nodes
(``vx`` then ``vz``) and a part on the "difference" nodes (``vy``). Both
blocks are again graph Laplacians, built here in closed form from the
original weights.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import WEIGHT_RTOL, Graph, laplacian
from .symmetry import NodePartition, is_phi_symmetric, partition

__all__ = [
    "HaarStage",
    "DecompositionResult",
    "haar_stage",
    "haar_stage_matrix",
    "conjugated_laplacian",
    "decompose",
    "even_odd_components",
    "split_components",
    "block_laplacian",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class HaarStage:
    """Parallel Haar units on node pairs; ``passthrough`` nodes are untouched."""

    n: int
    pairs: tuple[tuple[int, int], ...]
    passthrough: tuple[int, ...]

    def __post_init__(self):
        covered = [i for pair in self.pairs for i in pair] + list(self.passthrough)
        if sorted(covered) != list(range(self.n)):
            raise ValueError("pairs and passthrough must cover every index exactly once")


def haar_stage(phi: Sequence[int]) -> HaarStage:
    part = partition(phi)
    return HaarStage(len(phi), tuple(part.pairs), part.vz)


def haar_stage_matrix(stage: HaarStage) -> np.ndarray:
    """Orthogonal butterfly matrix ``B_phi`` of a stage (symmetric, self-inverse)."""
    B = np.zeros((stage.n, stage.n))
    r = 1.0 / SQRT2
    for x, y in stage.pairs:
        B[x, x] = r
        B[y, y] = -r
        B[x, y] = B[y, x] = r
    for z in stage.passthrough:
        B[z, z] = 1.0
    return B


def conjugated_laplacian(L, stage: HaarStage) -> np.ndarray:
    """``B^T L B`` in the original node indexing."""
    B = haar_stage_matrix(stage)
    return B.T @ np.asarray(L, dtype=float) @ B


@dataclass(frozen=True)
class DecompositionResult:
    """Sum graph on ``plus_nodes`` and difference graph on ``minus_nodes``.

    ``plus_nodes[k]`` is the parent node behind node k of ``g_plus`` (the
    ``vx`` nodes first, then ``vz``); likewise ``minus_nodes`` for ``g_minus``.
    """

    g_plus: Graph
    g_minus: Graph
    plus_nodes: tuple[int, ...]
    minus_nodes: tuple[int, ...]
    stage: HaarStage
    partition: NodePartition

    @property
    def order(self) -> tuple[int, ...]:
        """Parent indices in block order: plus block then minus block."""
        return self.plus_nodes + self.minus_nodes


def decompose(g: Graph, phi: Sequence[int], tol: float = WEIGHT_RTOL) -> DecompositionResult:
    """Split a symmetric graph into its sum and difference graphs.

    With ``X``/``Y``/``Z`` the paired-low, paired-high and fixed nodes:

    * sum graph edges: ``w_ij + w_i,phi(j)`` (X-X), ``sqrt(2) w_ij`` (X-Z),
      ``w_ij`` (Z-Z); self-loops ``s_i - (sqrt2 - 1) sum_Z w_ij`` on X and
      ``s_i + (2 - sqrt2) sum_X w_ij`` on Z.
    * difference graph edges ``w_ij - w_i,phi(j)`` and self-loops
      ``s_i + 2 sum_X w_ij + sum_Z w_ij``.

    Edges that cancel to zero are dropped.
    """
    if not is_phi_symmetric(g, phi, tol):
        raise ValueError("graph is not symmetric under phi")
    part = partition(phi)
    vx, vy, vz = part.vx, part.vy, part.vz
    in_x = set(vx)
    in_z = set(vz)
    w = g.weight
    phi = tuple(phi)

    plus_nodes = vx + vz
    plus_edges: dict[tuple[int, int], float] = {}
    for a in range(len(plus_nodes)):
        i = plus_nodes[a]
        for b in range(a + 1, len(plus_nodes)):
            j = plus_nodes[b]
            if i in in_x and j in in_x:
                val = w(i, j) + w(i, phi[j])
            elif i in in_z and j in in_z:
                val = w(i, j)
            else:
                val = SQRT2 * w(i, j)
            if val != 0.0:
                plus_edges[(a, b)] = val
    plus_loops = []
    for i in plus_nodes:
        if i in in_x:
            plus_loops.append(g.self_loops[i] - (SQRT2 - 1.0) * math.fsum(w(i, j) for j in vz))
        else:
            plus_loops.append(g.self_loops[i] + (2.0 - SQRT2) * math.fsum(w(i, j) for j in vx))

    minus_nodes = vy
    minus_edges: dict[tuple[int, int], float] = {}
    for a in range(len(vy)):
        i = vy[a]
        for b in range(a + 1, len(vy)):
            j = vy[b]
            val = w(i, j) - w(i, phi[j])
            if abs(val) > tol * max(1.0, abs(w(i, j))):
                minus_edges[(a, b)] = val
    minus_loops = [
        g.self_loops[i] + 2.0 * math.fsum(w(i, j) for j in vx) + math.fsum(w(i, j) for j in vz)
        for i in vy
    ]

    g_plus = Graph(len(plus_nodes), plus_edges, tuple(plus_loops))
    g_minus = Graph(len(minus_nodes), minus_edges, tuple(minus_loops))
    return DecompositionResult(
        g_plus, g_minus, plus_nodes, minus_nodes, HaarStage(g.n, tuple(part.pairs), vz), part
    )


def even_odd_components(x, phi: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Even and odd parts of a signal under a node pairing.

    ``x_even(i) = x_even(phi(i))``, ``x_odd(i) = -x_odd(phi(i))`` and the odd
    part vanishes on fixed nodes. Both are read off the Haar outputs
    ``B_phi^T x``: the sum outputs give the even part and the difference
    outputs the odd part.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (len(phi),):
        raise ValueError(f"signal length {x.size} does not match involution length {len(phi)}")
    part = partition(phi)
    y = haar_stage_matrix(HaarStage(len(phi), tuple(part.pairs), part.vz)).T @ x
    even = np.zeros_like(x)
    odd = np.zeros_like(x)
    vx = np.asarray(part.vx, dtype=int)
    vy = np.asarray(part.vy, dtype=int)
    vz = np.asarray(part.vz, dtype=int)
    even[vx] = y[vx] / SQRT2
    even[vy] = y[vx] / SQRT2
    even[vz] = y[vz]
    odd[vx] = y[vy] / SQRT2
    odd[vy] = -y[vy] / SQRT2
    return even, odd


def split_components(g: Graph) -> list[tuple[Graph, tuple[int, ...]]]:
    """Connected components as standalone graphs with their parent node lists."""
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        seen[start] = True
        nodes = [start]
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in g.neighbors[v]:
                if not seen[u]:
                    seen[u] = True
                    nodes.append(u)
                    queue.append(u)
        nodes.sort()
        comps.append((g.subgraph(nodes), tuple(nodes)))
    return comps


def block_laplacian(result: DecompositionResult) -> np.ndarray:
    """``L+ (+) L-`` arranged in the parent's node indexing."""
    n = result.stage.n
    M = np.zeros((n, n))
    plus = np.asarray(result.plus_nodes, dtype=int)
    minus = np.asarray(result.minus_nodes, dtype=int)
    M[np.ix_(plus, plus)] = laplacian(result.g_plus)
    if minus.size:
        M[np.ix_(minus, minus)] = laplacian(result.g_minus)
    return M
