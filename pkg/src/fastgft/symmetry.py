"""Involutive node pairings and the graph symmetries they describe.

A graph is symmetric under an involution ``phi`` when ``w[i, j] ==
w[phi[i], phi[j]]`` for every pair of nodes, self-loops included. Two
searches are provided: a pruned backtracking search for general graphs and a
canonical-encoding search that finds swaps of identical branches in trees.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .graph import WEIGHT_RTOL, Graph

__all__ = [
    "NodePartition",
    "SearchResult",
    "is_involution",
    "is_phi_symmetric",
    "p_phi",
    "partition",
    "iter_involutions",
    "search_involutions",
    "search_involutions_tree",
    "involution_count",
    "DEFAULT_BUDGET",
    "involution_to_dict",
    "involution_from_dict",
]

DEFAULT_BUDGET = 10**6


def _as_perm(phi: Sequence[int]) -> tuple[int, ...]:
    perm = tuple(int(v) for v in phi)
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
    return perm


def is_involution(phi: Sequence[int]) -> bool:
    """True iff ``phi`` is a permutation equal to its own inverse."""
    perm = _as_perm(phi)
    return all(perm[perm[i]] == i for i in range(len(perm)))


def p_phi(phi: Sequence[int]) -> int:
    """Number of Haar units an involution provides (its 2-cycle count)."""
    return sum(1 for i, v in enumerate(phi) if v != i) // 2


def _weight_matrix(g: Graph) -> np.ndarray:
    """W with self-loop weights on the diagonal."""
    W = np.array(g.adjacency)
    W[np.diag_indices(g.n)] = g.self_loops
    return W


def _tolerance(W: np.ndarray, rtol: float) -> np.ndarray:
    return rtol * np.maximum(1.0, np.abs(W))


def is_phi_symmetric(g: Graph, phi: Sequence[int], tol: float = WEIGHT_RTOL) -> bool:
    """Check ``w[i, j] == w[phi(i), phi(j)]`` for all i, j including i == j."""
    if len(phi) != g.n:
        return False
    perm = np.asarray(_as_perm(phi), dtype=int)
    W = _weight_matrix(g)
    Wp = W[np.ix_(perm, perm)]
    return bool(np.all(np.abs(W - Wp) <= tol * np.maximum(1.0, np.maximum(np.abs(W), np.abs(Wp)))))


@dataclass(frozen=True)
class NodePartition:
    """Split of the nodes induced by an involution.

    ``vx[k]`` and ``vy[k]`` are paired (``phi[vx[k]] == vy[k]``); ``vz``
    holds the fixed points. The smaller index of each pair goes to ``vx``.
    """

    vx: tuple[int, ...]
    vy: tuple[int, ...]
    vz: tuple[int, ...]

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.vx, self.vy))

    @property
    def p(self) -> int:
        return len(self.vx)


def partition(phi: Sequence[int]) -> NodePartition:
    if not is_involution(phi):
        raise ValueError("phi is not an involution")
    vx, vy, vz = [], [], []
    for i, v in enumerate(phi):
        if v == i:
            vz.append(i)
        elif i < v:
            vx.append(i)
            vy.append(v)
    return NodePartition(tuple(vx), tuple(vy), tuple(vz))


def involution_count(n: int) -> int:
    """Number of involutions on n elements, exact."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return sum(
        math.factorial(n) // (2**k * math.factorial(n - 2 * k) * math.factorial(k))
        for k in range(n // 2 + 1)
    )


def iter_involutions(n: int) -> Iterator[tuple[int, ...]]:
    """Enumerate all involutions on ``range(n)`` (identity included)."""
    phi = [-1] * n

    def rec(i: int):
        while i < n and phi[i] != -1:
            i += 1
        if i == n:
            yield tuple(phi)
            return
        phi[i] = i
        yield from rec(i + 1)
        for j in range(i + 1, n):
            if phi[j] == -1:
                phi[i], phi[j] = j, i
                yield from rec(i + 1)
                phi[j] = -1
        phi[i] = -1

    yield from rec(0)


class SearchResult(list):
    """List of involutions with a ``truncated`` flag set when the budget ran out."""

    truncated: bool = False
    extensions: int = 0


def _sort_key(phi: tuple[int, ...]):
    return (-p_phi(phi), phi)


def _signature_compatible(g: Graph, rtol: float) -> np.ndarray:
    """Boolean matrix: may node i be mapped to node j.

    Signature = (degree, self-loop, sorted incident weights); every component
    is preserved by a symmetry, so pruning on it never loses a solution.
    """
    W = np.array(g.adjacency)
    n = g.n
    deg = W.sum(axis=1)
    loops = np.asarray(g.self_loops, dtype=float)
    sizes = np.count_nonzero(W, axis=1)
    # sorted nonzero incident weights, zero padded to a common width
    inc = np.zeros((n, int(sizes.max(initial=0))))
    for i in range(n):
        inc[i, : sizes[i]] = np.sort(W[i][W[i] != 0])

    def close(a, b):
        return np.abs(a - b) <= rtol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))

    ok = close(deg[:, None], deg[None, :]) & close(loops[:, None], loops[None, :])
    ok &= sizes[:, None] == sizes[None, :]
    if inc.shape[1]:
        ok &= np.all(close(inc[:, None, :], inc[None, :, :]), axis=2)
    np.fill_diagonal(ok, True)
    return ok


def _bfs_order(g: Graph) -> list[int]:
    seen = [False] * g.n
    order: list[int] = []
    # start each component from its rarest-degree node for earlier pruning
    for start in sorted(range(g.n), key=lambda v: len(g.neighbors[v])):
        if seen[start]:
            continue
        seen[start] = True
        queue = [start]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in g.neighbors[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
    return order


def search_involutions(
    g: Graph,
    budget: int | None = DEFAULT_BUDGET,
    rtol: float = WEIGHT_RTOL,
) -> SearchResult:
    """All non-identity involutions under which ``g`` is symmetric.

    Backtracking assigns each node either to itself or to a compatible
    unassigned partner, checking the symmetry condition against every node
    assigned so far. Nodes are visited in BFS order, so a node's image must be
    a neighbor of the image of an earlier neighbor; only those are tried.
    ``budget`` caps the number of partial extensions; when exceeded the
    search stops and the result is flagged ``truncated``.
    Results are sorted by descending Haar count, then lexicographically.
    """
    n = g.n
    result = SearchResult()
    if n < 2:
        return result
    W = _weight_matrix(g)
    tolW = _tolerance(W, rtol)
    compat = _signature_compatible(g, rtol)
    order = _bfs_order(g)
    # earliest already-visited neighbor of each node in search order (-1 for none)
    rank = {v: k for k, v in enumerate(order)}
    anchor = [-1] * n
    for v in order:
        earlier = [u for u in g.neighbors[v] if rank[u] < rank[v]]
        if earlier:
            anchor[v] = min(earlier, key=rank.__getitem__)
    phi = np.full(n, -1, dtype=int)
    assigned: list[int] = []
    count = 0
    limit = math.inf if budget is None else budget

    def consistent(new: Sequence[int]) -> bool:
        idx = np.asarray(assigned, dtype=int)
        img = phi[idx]
        a = np.asarray(new, dtype=int)[:, None]
        b = phi[a]
        return not np.any(np.abs(W[a, idx] - W[b, img]) > np.maximum(tolW[a, idx], tolW[b, img]))

    class _Stop(Exception):
        pass

    def rec(pos: int):
        nonlocal count
        while pos < n and phi[order[pos]] != -1:
            pos += 1
        if pos == n:
            if np.any(phi != np.arange(n)):
                result.append(tuple(int(v) for v in phi))
            return
        i = order[pos]
        u = anchor[i]
        if u >= 0:
            # phi(i) must be a neighbor of phi(u) joined with the same weight
            pool = [j for j in g.neighbors[phi[u]] if compat[i, j]]
        else:
            pool = np.flatnonzero(compat[i])
        candidates = [j for j in pool if j != i and phi[j] == -1]
        if u < 0 or i in pool:
            candidates.append(i)
        for j in candidates:
            count += 1
            if count > limit:
                raise _Stop
            phi[i] = j
            phi[j] = i
            assigned.append(i)
            if j != i:
                assigned.append(j)
            if consistent((i, j) if j != i else (i,)):
                rec(pos + 1)
            assigned.pop()
            if j != i:
                assigned.pop()
                phi[j] = -1
            phi[i] = -1

    try:
        rec(0)
    except _Stop:
        result.truncated = True
    result.extensions = min(count, count if budget is None else budget)
    result.sort(key=_sort_key)
    return result


# -- trees ---------------------------------------------------------------------


def _is_tree(g: Graph) -> bool:
    if g.n == 0 or g.num_edges != g.n - 1:
        return False
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in g.neighbors[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == g.n


def _tree_centers(g: Graph) -> list[int]:
    if g.n <= 2:
        return list(range(g.n))
    deg = [len(a) for a in g.neighbors]
    leaves = [v for v in range(g.n) if deg[v] == 1]
    remaining = g.n
    while remaining > 2:
        remaining -= len(leaves)
        nxt = []
        for v in leaves:
            for u in g.neighbors[v]:
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(u)
        leaves = nxt
    return sorted(leaves)


def _key(w: float) -> float:
    # hashing key only; candidate involutions are re-verified with a tolerance
    return float(f"{w:.11e}")


class _RootedTree:
    """Tree rooted at ``root`` with AHU-style integer codes for every subtree."""

    def __init__(self, g: Graph, root: int, blocked: int | None = None, table: dict | None = None):
        self.g = g
        self.parent = {root: None}
        self.children: dict[int, list[int]] = defaultdict(list)
        order = [root]
        for v in order:
            for u in g.neighbors[v]:
                if u != self.parent[v] and u != blocked:
                    self.parent[u] = v
                    self.children[v].append(u)
                    order.append(u)
        self.order = order
        self.code: dict[int, int] = {}
        table = {} if table is None else table
        for v in reversed(order):
            kids = sorted((_key(g.weight(v, c)), self.code[c]) for c in self.children[v])
            label = (_key(g.self_loops[v]), tuple(kids))
            self.code[v] = table.setdefault(label, len(table))

    def branch_key(self, v: int) -> tuple[float, int]:
        """Code of the branch hanging from v's parent, including the edge weight."""
        return (_key(self.g.weight(v, self.parent[v])), self.code[v])

    def match(self, a: int, b: int, other: "_RootedTree | None" = None) -> dict[int, int]:
        """Node mapping between identical subtrees rooted at a and b."""
        other = other or self
        mapping = {}
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            mapping[x] = y
            kx = sorted(self.children[x], key=self.branch_key)
            ky = sorted(other.children[y], key=other.branch_key)
            stack.extend(zip(kx, ky))
        return mapping


def _swap(n: int, mapping: dict[int, int]) -> list[int]:
    phi = list(range(n))
    for x, y in mapping.items():
        phi[x], phi[y] = y, x
    return phi


def search_involutions_tree(g: Graph, rtol: float = WEIGHT_RTOL) -> list[tuple[int, ...]]:
    """Involutions of a tree obtained by swapping identical branches.

    Branches with a common root are grouped by canonical code; every pair in a
    group gives one swap. The combined involution pairs as many identical
    branches as possible top-down from the tree center, recursing into the
    branches left unpaired. For a bicentral tree whose two halves are
    identical the halves are swapped across the central edge. Every returned
    involution is verified against the weights.
    """
    if not _is_tree(g):
        raise ValueError("graph is not a tree")
    n = g.n
    centers = _tree_centers(g)
    found: set[tuple[int, ...]] = set()

    tree = _RootedTree(g, centers[0])
    combined = list(range(n))

    def branch_groups(v: int) -> list[list[int]]:
        groups = defaultdict(list)
        for c in tree.children[v]:
            groups[tree.branch_key(c)].append(c)
        return [sorted(m) for m in groups.values()]

    # elementary swaps of two identical branches at a common root
    for v in tree.order:
        for members in branch_groups(v):
            for ia, a in enumerate(members):
                for b in members[ia + 1:]:
                    found.add(tuple(_swap(n, tree.match(a, b))))

    # combined swap, top-down through the branches left fixed
    stack = [centers[0]]
    while stack:
        v = stack.pop()
        for members in branch_groups(v):
            half = len(members) // 2 * 2
            for a, b in zip(members[0:half:2], members[1:half:2]):
                for x, y in tree.match(a, b).items():
                    combined[x], combined[y] = y, x
            stack.extend(members[half:])
    found.add(tuple(combined))

    # identical halves across the central edge
    if len(centers) == 2:
        a, b = centers
        shared: dict[tuple, int] = {}
        left = _RootedTree(g, a, blocked=b, table=shared)
        right = _RootedTree(g, b, blocked=a, table=shared)
        if left.code[a] == right.code[b]:
            found.add(tuple(_swap(n, left.match(a, b, right))))

    identity = tuple(range(n))
    out = [phi for phi in found if phi != identity and is_involution(phi) and is_phi_symmetric(g, phi, rtol)]
    out.sort(key=_sort_key)
    return out


def involution_to_dict(phi: Iterable[int]) -> dict:
    return {"phi": [int(v) for v in phi]}


def involution_from_dict(data) -> tuple[int, ...]:
    phi = _as_perm(data["phi"])
    if not is_involution(phi):
        raise ValueError("phi is not an involution")
    return phi
