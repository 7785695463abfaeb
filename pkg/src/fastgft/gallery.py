"""Graph families with known involutive symmetries.

Grids are indexed row-major: node ``(k, l)`` (row k, column l, both 0-based,
row 0 at the top) has flat index ``k * N + l``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .graph import Graph
from .symmetry import is_phi_symmetric

__all__ = [
    "GalleryEntry",
    "line_graph",
    "cycle_graph",
    "star_graph",
    "complete_graph",
    "grid_graph",
    "grid_involution",
    "skeleton_graph",
    "GRID_SYMMETRIES",
    "gallery",
    "get_entry",
    "BENCHMARK_GRAPHS",
]


@dataclass(frozen=True)
class GalleryEntry:
    """A named graph with involutions it is known to be symmetric under.

    ``reference_ops`` holds published ``((adds, mults) dense, (adds, mults)
    fast)`` operation counts and ``reference_reduction`` the published
    runtime reduction (fraction) where available.
    """

    name: str
    graph: Graph
    known_involutions: dict[str, tuple[int, ...]] = field(default_factory=dict)
    description: str = ""
    reference_ops: Optional[tuple[tuple[int, int], tuple[int, int]]] = None
    reference_reduction: Optional[float] = None

    def __post_init__(self):
        for label, phi in self.known_involutions.items():
            if not is_phi_symmetric(self.graph, phi):
                raise ValueError(f"{self.name}: graph is not symmetric under {label}")


# -- families -------------------------------------------------------------------


def line_graph(weights: Sequence[float], self_loops: Optional[Sequence[float]] = None) -> Graph:
    """Path graph with ``weights[i]`` on edge (i, i+1)."""
    n = len(weights) + 1
    edges = {(i, i + 1): float(w) for i, w in enumerate(weights)}
    return Graph(n, edges, tuple(self_loops) if self_loops is not None else ())


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    return Graph(n, {(i, (i + 1) % n): 1.0 for i in range(n)})


def star_graph(n: int) -> Graph:
    """Node 0 joined to each of the n-1 leaves."""
    if n < 2:
        raise ValueError("a star needs at least 2 nodes")
    return Graph(n, {(0, i): 1.0 for i in range(1, n)})


def complete_graph(n: int) -> Graph:
    if n < 2:
        raise ValueError("a complete graph needs at least 2 nodes")
    return Graph(n, {(i, j): 1.0 for i, j in itertools.combinations(range(n), 2)})


def grid_graph(kind: str, N: int, a: float = 0.5, w: float = 2.0) -> Graph:
    """N x N grid graphs.

    ``"bidiag6"``: 4-connected grid with unit weights plus the main-direction
    diagonals ``(k, l)-(k+1, l+1)`` with weight ``a``; symmetric about both
    diagonals. ``"zshaped"``: horizontal edges with weight 1 plus anti-diagonal
    edges ``(k, l)-(k+1, l-1)`` with weight ``w`` (a sheared 4-connected grid);
    centrosymmetric.
    """
    if N < 2:
        raise ValueError("grid size must be at least 2")

    def idx(k, l):
        return k * N + l

    edges: dict[tuple[int, int], float] = {}
    if kind == "bidiag6":
        for k in range(N):
            for l in range(N):
                if l + 1 < N:
                    edges[(idx(k, l), idx(k, l + 1))] = 1.0
                if k + 1 < N:
                    edges[(idx(k, l), idx(k + 1, l))] = 1.0
                if k + 1 < N and l + 1 < N:
                    edges[(idx(k, l), idx(k + 1, l + 1))] = float(a)
    elif kind == "zshaped":
        for k in range(N):
            for l in range(N):
                if l + 1 < N:
                    edges[(idx(k, l), idx(k, l + 1))] = 1.0
                if k + 1 < N and l >= 1:
                    edges[(idx(k, l), idx(k + 1, l - 1))] = float(w)
    else:
        raise ValueError(f"unsupported grid kind {kind!r}")
    return Graph(N * N, edges)


GRID_SYMMETRIES: dict[str, Callable[[int, int, int], tuple[int, int]]] = {
    "centrosymmetry": lambda k, l, N: (N - 1 - k, N - 1 - l),
    "ud": lambda k, l, N: (N - 1 - k, l),
    "lr": lambda k, l, N: (k, N - 1 - l),
    "diagonal": lambda k, l, N: (l, k),
    "antidiagonal": lambda k, l, N: (N - 1 - l, N - 1 - k),
}


def grid_involution(kind: str, N: int) -> tuple[int, ...]:
    """Flat-index involution of an N x N grid symmetry (see ``GRID_SYMMETRIES``)."""
    try:
        f = GRID_SYMMETRIES[kind]
    except KeyError:
        raise ValueError(f"unknown grid symmetry {kind!r}; choose from {sorted(GRID_SYMMETRIES)}") from None
    phi = []
    for k in range(N):
        for l in range(N):
            r, c = f(k, l, N)
            phi.append(r * N + c)
    return tuple(phi)


# 15 joints: head, neck, torso, then shoulder/elbow/hand and hip/knee/foot per side
_SKELETON15 = [
    (0, 1), (1, 2),
    (1, 3), (3, 4), (4, 5),
    (1, 6), (6, 7), (7, 8),
    (2, 9), (9, 10), (10, 11),
    (2, 12), (12, 13), (13, 14),
]
_SKELETON15_MIRROR = {3: 6, 4: 7, 5: 8, 9: 12, 10: 13, 11: 14}

# 25-joint Kinect v2 hierarchy (1-based joint numbers)
_SKELETON25 = [
    (1, 2), (2, 21), (3, 21), (4, 3), (5, 21), (6, 5), (7, 6), (8, 7),
    (9, 21), (10, 9), (11, 10), (12, 11), (13, 1), (14, 13), (15, 14), (16, 15),
    (17, 1), (18, 17), (19, 18), (20, 19), (22, 23), (23, 8), (24, 25), (25, 12),
]
_SKELETON25_MIRROR = {5: 9, 6: 10, 7: 11, 8: 12, 13: 17, 14: 18, 15: 19, 16: 20, 22: 24, 23: 25}


def skeleton_graph(variant: int) -> Graph:
    """Unit-weight human skeleton trees with 15 or 25 joints."""
    if variant == 15:
        return Graph(15, {e: 1.0 for e in _SKELETON15})
    if variant == 25:
        return Graph(25, {(i - 1, j - 1): 1.0 for i, j in _SKELETON25})
    raise ValueError("skeleton variant must be 15 or 25")


def _mirror(n: int, pairs: dict[int, int], base: int = 0) -> tuple[int, ...]:
    phi = list(range(n))
    for i, j in pairs.items():
        phi[i - base], phi[j - base] = j - base, i - base
    return tuple(phi)


def _reversal(n: int) -> tuple[int, ...]:
    return tuple(range(n - 1, -1, -1))


def _transposition(n: int, i: int, j: int) -> tuple[int, ...]:
    phi = list(range(n))
    phi[i], phi[j] = j, i
    return tuple(phi)


# -- registry -------------------------------------------------------------------


def _cycle_entry(n, ref=None, red=None):
    return GalleryEntry(
        f"cycle{n}", cycle_graph(n), {"reversal": _reversal(n)},
        f"{n}-node unit-weight cycle", ref, red,
    )


def _grid_entry(kind, N, ref=None, red=None):
    if kind == "bidiag6":
        g = grid_graph(kind, N, a=0.5)
        invs = {s: grid_involution(s, N) for s in ("diagonal", "antidiagonal", "centrosymmetry")}
        desc = f"{N}x{N} bi-diagonally symmetric 6-connected grid, a=0.5"
        name = f"bidiag{N}x{N}"
    else:
        g = grid_graph(kind, N, w=2.0)
        invs = {"centrosymmetry": grid_involution("centrosymmetry", N)}
        desc = f"{N}x{N} z-shaped grid, w=2"
        name = f"zshaped{N}x{N}"
    return GalleryEntry(name, g, invs, desc, ref, red)


def _build_registry() -> dict[str, GalleryEntry]:
    entries = [
        _cycle_entry(4),
        _cycle_entry(12, ((132, 144), (44, 30)), 0.527),
        _cycle_entry(80, ((6320, 6400), (1224, 1078)), 0.797),
        GalleryEntry("line4", line_graph([1.0] * 3), {"reversal": _reversal(4)}, "uniform path, 4 nodes"),
        GalleryEntry("line8", line_graph([1.0] * 7), {"reversal": _reversal(8)}, "uniform path, 8 nodes"),
        GalleryEntry(
            "star8", star_graph(8),
            {f"swap{i}-{i + 1}": _transposition(8, i, i + 1) for i in range(1, 7)},
            "star with 7 leaves",
        ),
        GalleryEntry(
            "complete6", complete_graph(6),
            {f"swap{i}-{j}": _transposition(6, i, j) for i, j in itertools.combinations(range(6), 2)},
            "complete graph on 6 nodes",
        ),
        _grid_entry("bidiag6", 4, ((240, 256), (80, 80)), 0.537),
        _grid_entry("bidiag6", 8, ((4032, 4096), (1104, 1072)), 0.685),
        _grid_entry("zshaped", 4, ((240, 256), (128, 112)), 0.415),
        _grid_entry("zshaped", 8, ((4032, 4096), (2048, 2048)), 0.450),
        GalleryEntry(
            "skeleton15", skeleton_graph(15), {"mirror": _mirror(15, _SKELETON15_MIRROR)},
            "15-joint skeleton", ((210, 225), (96, 102)), 0.455,
        ),
        GalleryEntry(
            "skeleton25", skeleton_graph(25), {"mirror": _mirror(25, _SKELETON25_MIRROR, base=1)},
            "25-joint Kinect v2 skeleton", ((600, 625), (272, 282)), 0.475,
        ),
    ]
    return {e.name: e for e in entries}


_REGISTRY: Optional[dict[str, GalleryEntry]] = None


def gallery() -> dict[str, GalleryEntry]:
    """All gallery entries by name."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build_registry()
    return _REGISTRY


def get_entry(name: str) -> GalleryEntry:
    try:
        return gallery()[name]
    except KeyError:
        raise KeyError(f"unknown gallery graph {name!r}; available: {', '.join(gallery())}") from None


#: The eight graphs of the operation-count and runtime comparison.
BENCHMARK_GRAPHS = (
    "cycle12", "cycle80", "bidiag4x4", "bidiag8x8",
    "zshaped4x4", "zshaped8x8", "skeleton15", "skeleton25",
)
