"""Recursive fast-GFT planner and plan execution.

A plan is a list of stages acting in place on a working vector of length n.
Read left to right, the stages compute ``U^T x`` for the GFT matrix ``U``
that the plan realizes. Stage semantics on the working vector ``w``:

* ``Haar(pairs)``: ``w[i], w[j] = w[i] + w[j], w[i] - w[j]`` for each pair.
  Units are unnormalized; the missing ``1/sqrt(2)`` factors are folded into
  later dense leaves or a final ``Scale``.
* ``Permutation(perm)``: ``w = w[perm]``.
* ``DenseLeaf(offset, A)``: ``w[offset:offset+k] = A @ w[offset:offset+k]``.
* ``Scale(factors)``: ``w *= factors``.
* ``Givens(rotations)``: for each ``(p, q, theta)``,
  ``w[p], w[q] = c w[p] + s w[q], -s w[p] + c w[q]``.

The planner splits disconnected graphs into components, and splits
symmetric graphs with one Haar stage into a sum graph and a difference graph.
It recurses on the pieces until no symmetry is left.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from .decompose import decompose, split_components
from .graph import Graph, laplacian
from ._executor import CHUNK, Program
from .spectral import eigenvalue_clusters, jacobi_eigh
from .symmetry import (
    _is_tree,
    is_phi_symmetric,
    p_phi,
    partition,
    search_involutions,
    search_involutions_tree,
)

__all__ = [
    "Haar",
    "Permutation",
    "DenseLeaf",
    "Scale",
    "Givens",
    "PlanStage",
    "OpCount",
    "PlanNode",
    "Strategy",
    "FastGftPlan",
    "plan_fast_gft",
    "apply_node_major",
    "dense_plan",
    "as_dense",
    "apply",
    "apply_batch",
    "op_count",
    "serialize",
    "deserialize",
    "PLAN_BUDGET",
]

SQRT2 = math.sqrt(2.0)

#: Search budget per planner level; smaller than the library default because
#: the planner runs one search per sub-graph.
PLAN_BUDGET = 10**5

# coefficients whose eigenvalues differ by less than this (relative) keep plan order
_TIE_TOL = 1e-8


# -- stages ---------------------------------------------------------------------


@dataclass(frozen=True)
class Haar:
    pairs: np.ndarray  # (p, 2) int

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if np.unique(pairs).size != pairs.size:
            raise ValueError("Haar pairs must be disjoint")
        object.__setattr__(self, "pairs", pairs)


@dataclass(frozen=True)
class Permutation:
    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("not a permutation")
        object.__setattr__(self, "perm", perm)


@dataclass(frozen=True)
class DenseLeaf:
    offset: int
    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("dense leaf matrix must be square")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Scale:
    factors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "factors", np.asarray(self.factors, dtype=float))


@dataclass(frozen=True)
class Givens:
    rotations: np.ndarray  # (r, 3): p, q, theta

    def __post_init__(self):
        rot = np.asarray(self.rotations, dtype=float).reshape(-1, 3)
        idx = rot[:, :2].astype(np.int64)
        if np.unique(idx).size != idx.size:
            raise ValueError("Givens rotations within a layer must be disjoint")
        object.__setattr__(self, "rotations", rot)

    @property
    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        return self.rotations[:, 0].astype(np.int64), self.rotations[:, 1].astype(np.int64)


PlanStage = Union[Haar, Permutation, DenseLeaf, Scale, Givens]


@dataclass(frozen=True)
class OpCount:
    additions: int
    multiplications: int

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(self.additions + other.additions, self.multiplications + other.multiplications)

    def __str__(self) -> str:
        return f"{self.additions}/{self.multiplications}"


def _stage_ops(stage: PlanStage) -> OpCount:
    if isinstance(stage, Haar):
        return OpCount(2 * len(stage.pairs), 0)
    if isinstance(stage, DenseLeaf):
        k = stage.size
        return OpCount(k * (k - 1), k * k)
    if isinstance(stage, Scale):
        return OpCount(0, int(np.count_nonzero(np.abs(stage.factors) != 1.0)))
    if isinstance(stage, Givens):
        r = len(stage.rotations)
        return OpCount(2 * r, 4 * r)
    return OpCount(0, 0)


# -- execution ------------------------------------------------------------------


# -- plan -----------------------------------------------------------------------


@dataclass
class PlanNode:
    """Provenance of one planner level.

    ``graph`` is the sub-graph handled here and ``nodes`` maps its nodes to
    the parent level. ``kind`` is ``"leaf"``, ``"haar"`` (symmetric split via
    ``phi``) or ``"components"`` (disconnected graph split into pieces).
    """

    graph: Graph
    nodes: tuple[int, ...]
    kind: str
    phi: Optional[tuple[int, ...]] = None
    children: list["PlanNode"] = field(default_factory=list)
    eigenvalues: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.graph.n

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and orthonormal GFT basis of ``graph`` realized by this subtree.

        Columns are in ascending eigenvalue order, ties kept in subtree order.
        """
        if self.kind == "leaf":
            return self.eigenvalues, self.eigenvectors
        n = self.n
        cols = []
        lams = []
        if self.kind == "haar":
            part = partition(self.phi)
            plus, minus = self.children[0], self.children[1:]
            lam, V = plus.basis()
            full = np.zeros((n, V.shape[1]))
            for k, v in enumerate(plus.nodes):
                full[v] = V[k]
            cols.append(full)
            lams.append(lam)
            for child in minus:
                lam, V = child.basis()
                full = np.zeros((n, V.shape[1]))
                for k, v in enumerate(child.nodes):
                    full[v] = V[k]
                cols.append(full)
                lams.append(lam)
            Z = np.hstack(cols)
            # rows of Z are indexed by V+ (vx then vz) and V- (vy) positions; map back
            plus_nodes = list(part.vx) + list(part.vz)
            minus_nodes = list(part.vy)
            B = np.zeros((n, Z.shape[1]))
            r = 1.0 / SQRT2
            n_plus = len(plus_nodes)
            for k, v in enumerate(plus_nodes):
                if v in part.vz:
                    B[v] += Z[k]
                else:
                    B[v] += r * Z[k]
                    B[self.phi[v]] += r * Z[k]
            for k, v in enumerate(minus_nodes):
                B[self.phi[v]] += r * Z[n_plus + k]
                B[v] -= r * Z[n_plus + k]
            U = B
        else:
            U = np.zeros((n, 0))
            for child in self.children:
                lam, V = child.basis()
                full = np.zeros((n, V.shape[1]))
                for k, v in enumerate(child.nodes):
                    full[v] = V[k]
                cols.append(full)
                lams.append(lam)
            U = np.hstack(cols)
        lam = np.concatenate(lams)
        order = _coefficient_order(lam)
        return lam[order], U[:, order]

    def to_dict(self) -> dict:
        out = {"n": self.n, "kind": self.kind}
        if self.phi is not None:
            out["phi"] = list(self.phi)
        if self.children:
            out["children"] = [{"nodes": list(c.nodes), **c.to_dict()} for c in self.children]
        return out

    def leaf_sizes(self) -> list[int]:
        return [node.n for node in self.walk() if node.kind == "leaf"]

    def haar_levels(self) -> int:
        """Largest number of Haar stages on any root-to-leaf path."""
        below = max((c.haar_levels() for c in self.children), default=0)
        return below + (1 if self.kind == "haar" else 0)


@dataclass(frozen=True)
class Strategy:
    """Planner settings.

    ``budget`` caps each involution search, ``max_depth`` caps recursion
    (Haar levels), graphs with at most ``min_leaf`` nodes become dense
    leaves, and ``hints`` (if given) are tried at the top level instead of a
    search. ``split_components`` splits disconnected sub-graphs at every level.

    Involutions are ranked by Haar count, then by the number of X-Y edges
    that are not pair edges, then lexicographically. In the first
    ``lookahead_depth`` levels the best ``lookahead`` candidate classes are
    each planned fully and the cheapest subtree is kept; ``lookahead=1`` is
    the plain greedy choice.
    """

    budget: Optional[int] = PLAN_BUDGET
    max_depth: int = 16
    min_leaf: int = 2
    hints: tuple[tuple[int, ...], ...] = ()
    split_components: bool = True
    lookahead: int = 3
    lookahead_depth: int = 3


@dataclass(frozen=True)
class FastGftPlan:
    """Staged realization of ``x -> U^T x``.

    Output coefficient k corresponds to ``eigenvalues[k]`` (ascending).
    """

    n: int
    stages: tuple[PlanStage, ...]
    eigenvalues: np.ndarray
    tree: Optional[PlanNode] = None

    @cached_property
    def _program(self) -> Program:
        return Program(self.n, self.stages)

    def apply(self, x) -> np.ndarray:
        return apply(self, x)

    def apply_batch(self, X, threads: int = 1) -> np.ndarray:
        return apply_batch(self, X, threads=threads)

    def op_count(self) -> OpCount:
        return op_count(self)

    def matrix(self) -> np.ndarray:
        """The realized GFT matrix ``U`` (columns are basis vectors)."""
        return apply_batch(self, np.eye(self.n))

    @property
    def num_haar_stages(self) -> int:
        return sum(1 for st in self.stages if isinstance(st, Haar))

    def summary(self) -> str:
        kinds = {}
        for st in self.stages:
            name = type(st).__name__
            kinds[name] = kinds.get(name, 0) + 1
        parts = ", ".join(f"{v} {k}" for k, v in kinds.items())
        return f"n={self.n}: {parts}; ops {op_count(self)} (adds/mults)"


def _check_signals(plan: FastGftPlan, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != plan.n:
        raise ValueError(f"expected signals of length {plan.n}, got shape {X.shape}")
    return X


def apply(plan: FastGftPlan, x) -> np.ndarray:
    """GFT coefficients ``U^T x`` of a single signal."""
    x = np.asarray(x, dtype=float)
    if x.shape != (plan.n,):
        raise ValueError(f"expected a signal of length {plan.n}, got shape {x.shape}")
    return apply_batch(plan, x[None, :])[0]


def apply_node_major(plan: FastGftPlan, S, threads: int = 1) -> np.ndarray:
    """Coefficients for signals stored as the columns of ``S`` (n, m).

    Returns an (n, m) array whose column j holds ``U^T S[:, j]``. This is
    the layout the executor works in, so no transposes are made. With
    ``threads > 1`` the columns are split into contiguous ranges of whole
    blocks; every column is computed the same way regardless.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != plan.n:
        raise ValueError(f"expected signals as columns of length {plan.n}, got shape {S.shape}")
    S = np.ascontiguousarray(S)
    m = S.shape[1]
    out = np.empty((plan.n, m))
    prog = plan._program
    blocks = -(-m // CHUNK)
    threads = max(1, min(int(threads), blocks))
    if threads == 1:
        prog.run(S, out)
        return out
    from concurrent.futures import ThreadPoolExecutor

    cuts = [min(m, (blocks * t // threads) * CHUNK) for t in range(threads + 1)]
    with ThreadPoolExecutor(threads) as pool:
        list(pool.map(lambda t: prog.run(S, out, cuts[t], cuts[t + 1]), range(threads)))
    return out


def apply_batch(plan: FastGftPlan, X, threads: int = 1) -> np.ndarray:
    """Coefficients for a batch of signals, one signal per row of ``X``.

    Returns an (m, n) array. The result does not depend on ``threads``.
    """
    X = _check_signals(plan, X)
    return apply_node_major(plan, X.T, threads=threads).T


def op_count(plan: FastGftPlan) -> OpCount:
    total = OpCount(0, 0)
    for st in plan.stages:
        total = total + _stage_ops(st)
    return total


# -- planner --------------------------------------------------------------------


def _coefficient_order(lam: np.ndarray) -> np.ndarray:
    """Ascending eigenvalue order; near-ties keep their current order."""
    lam = np.asarray(lam, dtype=float)
    order = np.argsort(lam, kind="stable")
    out = []
    for idx in eigenvalue_clusters(lam[order], _TIE_TOL):
        out.extend(sorted(order[idx]))
    return np.asarray(out, dtype=np.int64)


def _leaf(g: Graph, nodes) -> PlanNode:
    spec = jacobi_eigh(laplacian(g))
    return PlanNode(g, tuple(nodes), "leaf", eigenvalues=spec.eigenvalues, eigenvectors=spec.eigenvectors)


def _cross_edges(g: Graph, phi: Sequence[int]) -> int:
    """Edges joining the X and Y sides other than the pair edges ``(i, phi(i))``.

    Each such edge turns into a sign-flipped edge of the difference graph,
    which tends to hide its remaining symmetry.
    """
    part = partition(phi)
    in_y = np.zeros(g.n, dtype=bool)
    in_y[list(part.vy)] = True
    in_x = np.zeros(g.n, dtype=bool)
    in_x[list(part.vx)] = True
    count = 0
    for i, j in g.edges:
        if phi[i] != j and ((in_x[i] and in_y[j]) or (in_y[i] and in_x[j])):
            count += 1
    return count


def _rank(g: Graph, phi: tuple[int, ...]):
    return (-p_phi(phi), _cross_edges(g, phi), phi)


def _candidates(g: Graph, strategy: Strategy, hints) -> list[tuple[int, ...]]:
    """Involutions worth trying, best first, one per (Haar count, cross edges) class.

    Involutions in the same class are usually related by another symmetry of
    the graph and give plans of the same cost, so only the first is kept.
    """
    found: list[tuple[int, ...]] = []
    if hints:
        found = [tuple(h) for h in hints if len(h) == g.n and is_phi_symmetric(g, h)]
    if not found:
        if _is_tree(g):
            found = search_involutions_tree(g)
        else:
            found = search_involutions(g, budget=strategy.budget)
    ranked = sorted(_rank(g, tuple(f)) for f in found if p_phi(f) > 0)
    out, seen = [], set()
    for neg_p, cross, phi in ranked:
        if (neg_p, cross) not in seen:
            seen.add((neg_p, cross))
            out.append(phi)
    return out


def _cost(node: PlanNode) -> tuple[int, int]:
    """(mults, adds) of the stages a subtree will emit, ignoring gain fix-ups."""
    if node.kind == "leaf":
        k = node.n
        return (k * k, k * (k - 1)) if k > 1 else (1, 0)
    mults = sum(_cost(c)[0] for c in node.children)
    adds = sum(_cost(c)[1] for c in node.children)
    if node.kind == "haar":
        adds += 2 * p_phi(node.phi)
    return mults, adds


def _build(g: Graph, nodes, depth: int, strategy: Strategy, hints=()) -> PlanNode:
    if g.n <= strategy.min_leaf:
        return _leaf(g, nodes)
    if strategy.split_components:
        comps = split_components(g)
        if len(comps) > 1:
            children = [_build(sub, idx, depth, strategy) for sub, idx in comps]
            return PlanNode(g, tuple(nodes), "components", children=children)
    if depth >= strategy.max_depth:
        return _leaf(g, nodes)
    cands = _candidates(g, strategy, hints)
    if not cands:
        return _leaf(g, nodes)
    width = strategy.lookahead if depth < strategy.lookahead_depth else 1
    best = None
    for phi in cands[: max(1, width)]:
        node = _split(g, nodes, phi, depth, strategy)
        if best is None or _cost(node) < _cost(best):
            best = node
    return best


def _split(g: Graph, nodes, phi, depth: int, strategy: Strategy) -> PlanNode:
    dec = decompose(g, phi)
    n_plus = len(dec.plus_nodes)
    # children index their parent through block positions: V+ first, then V-
    children = [_build(dec.g_plus, range(n_plus), depth + 1, strategy)]
    for sub, idx in split_components(dec.g_minus):
        children.append(_build(sub, [n_plus + i for i in idx], depth + 1, strategy))
    return PlanNode(g, tuple(nodes), "haar", phi=phi, children=children)


class _Emitter:
    def __init__(self, n: int):
        self.n = n
        self.stages: list[PlanStage] = []
        self.gain = np.ones(n)
        self.scale = np.ones(n)
        self.lam = np.zeros(n)
        self.leaves: list[tuple[int, int]] = []  # (stage index or -1, offset) per leaf

    def permute_block(self, offset: int, local_order: Sequence[int]):
        local_order = np.asarray(local_order, dtype=np.int64)
        if np.array_equal(local_order, np.arange(local_order.size)):
            return
        perm = np.arange(self.n)
        perm[offset : offset + local_order.size] = offset + local_order
        self.stages.append(Permutation(perm))
        self.gain = self.gain[perm]

    def emit(self, node: PlanNode, offset: int):
        k = node.n
        if node.kind == "leaf":
            g = self.gain[offset : offset + k]
            self.lam[offset : offset + k] = node.eigenvalues
            if k == 1:
                self.scale[offset] = node.eigenvectors[0, 0] / g[0]
            else:
                self.stages.append(DenseLeaf(offset, node.eigenvectors.T / g[None, :]))
            self.gain[offset : offset + k] = 1.0
            return
        if node.kind == "components":
            order = [v for c in node.children for v in c.nodes]
            self.permute_block(offset, order)
            pos = offset
            for c in node.children:
                self.emit(c, pos)
                pos += c.n
            return
        part = partition(node.phi)
        x = offset + np.asarray(part.vx, dtype=np.int64)
        y = offset + np.asarray(part.vy, dtype=np.int64)
        uneven = x[self.gain[x] != self.gain[y]]
        if uneven.size:
            # bring mismatched pairs back to unit gain so sums stay exact
            f = np.ones(self.n)
            both = np.concatenate([uneven, offset + np.asarray(node.phi)[uneven - offset]])
            f[both] = 1.0 / self.gain[both]
            self.stages.append(Scale(f))
            self.gain[both] = 1.0
        self.stages.append(Haar(np.stack([x, y], axis=1)))
        self.gain[x] *= SQRT2
        self.gain[y] *= SQRT2
        n_plus = len(part.vx) + len(part.vz)
        order = list(part.vx) + list(part.vz)
        plus_child, minus = node.children[0], node.children[1:]
        # minus children index V- by block position n_plus + a, a indexing vy
        for c in minus:
            order.extend(part.vy[v - n_plus] for v in c.nodes)
        self.permute_block(offset, order)
        self.emit(plus_child, offset)
        pos = offset + n_plus
        for c in minus:
            self.emit(c, pos)
            pos += c.n


def _finish(n: int, em: _Emitter, tree: Optional[PlanNode]) -> FastGftPlan:
    stages = list(em.stages)
    if np.any(em.scale != 1.0):
        stages.append(Scale(em.scale.copy()))
    order = _coefficient_order(em.lam)
    if not np.array_equal(order, np.arange(n)):
        stages.append(Permutation(order))
    plan = FastGftPlan(n, tuple(stages), em.lam[order].copy(), tree)
    return _normalize_plan_signs(plan)


def _normalize_plan_signs(plan: FastGftPlan, tol: float = 1e-8) -> FastGftPlan:
    """Flip output rows so every realized basis vector has a positive leading entry."""
    U = plan.matrix()
    flip = np.zeros(plan.n, dtype=bool)
    for k in range(plan.n):
        big = np.flatnonzero(np.abs(U[:, k]) > tol)
        flip[k] = bool(big.size) and U[big[0], k] < 0
    if not flip.any():
        return plan
    stages = list(plan.stages)
    # undo the final permutation to find the pre-permutation position of each output
    pos = np.arange(plan.n)
    if stages and isinstance(stages[-1], Permutation):
        pos = stages[-1].perm
    flip_pre = np.zeros(plan.n, dtype=bool)
    flip_pre[pos[flip]] = True
    sign = np.where(flip_pre, -1.0, 1.0)
    new = []
    handled = np.zeros(plan.n, dtype=bool)
    for st in stages:
        if isinstance(st, DenseLeaf):
            o, k = st.offset, st.size
            s = sign[o : o + k]
            handled[o : o + k] = True
            new.append(DenseLeaf(o, st.matrix * s[:, None]) if np.any(s < 0) else st)
        else:
            new.append(st)
    rest = ~handled & flip_pre
    if rest.any():
        idx = next((i for i, st in enumerate(new) if isinstance(st, Scale) and i >= len(new) - 2), None)
        if idx is None:
            f = np.where(rest, -1.0, 1.0)
            at = len(new) - 1 if new and isinstance(new[-1], Permutation) else len(new)
            new.insert(at, Scale(f))
        else:
            new[idx] = Scale(np.where(rest, -new[idx].factors, new[idx].factors))
    return FastGftPlan(plan.n, tuple(new), plan.eigenvalues, plan.tree)


def plan_fast_gft(g: Graph, strategy: Optional[Strategy] = None, **kwargs) -> FastGftPlan:
    """Build a fast GFT plan for ``g``.

    Keyword arguments are forwarded to :class:`Strategy` when ``strategy`` is
    not given, e.g. ``plan_fast_gft(g, max_depth=1)`` for a single Haar stage
    followed by dense sub-transforms.
    """
    if strategy is None:
        strategy = Strategy(**kwargs)
    elif kwargs:
        raise TypeError("pass either a Strategy or keyword settings, not both")
    tree = _build(g, range(g.n), 0, strategy, strategy.hints)
    em = _Emitter(g.n)
    em.emit(tree, 0)
    return _finish(g.n, em, tree)


def dense_plan(g: Graph) -> FastGftPlan:
    """Single dense leaf holding the full GFT matrix."""
    tree = _leaf(g, range(g.n))
    em = _Emitter(g.n)
    em.emit(tree, 0)
    return _finish(g.n, em, tree)


def as_dense(plan: FastGftPlan) -> FastGftPlan:
    """Single dense stage realizing exactly the transform of ``plan``.

    Unlike :func:`dense_plan` this keeps the basis ``plan`` chose inside
    repeated eigenvalues, so both give the same coefficients.
    """
    U = plan.matrix()
    return FastGftPlan(plan.n, (DenseLeaf(0, U.T),), plan.eigenvalues.copy())


# -- serialization ----------------------------------------------------------------


def _stage_to_dict(st: PlanStage) -> dict:
    if isinstance(st, Haar):
        return {"type": "haar", "pairs": st.pairs.tolist()}
    if isinstance(st, Permutation):
        return {"type": "perm", "perm": st.perm.tolist()}
    if isinstance(st, DenseLeaf):
        return {"type": "dense", "offset": st.offset, "matrix": st.matrix.tolist()}
    if isinstance(st, Scale):
        return {"type": "scale", "factors": st.factors.tolist()}
    if isinstance(st, Givens):
        rot = [[int(p), int(q), float(t)] for p, q, t in st.rotations]
        return {"type": "givens", "rotations": rot}
    raise TypeError(f"unknown stage {type(st).__name__}")


def _stage_from_dict(d: dict, n: int) -> PlanStage:
    kind = d["type"]
    if kind == "haar":
        st = Haar(np.asarray(d["pairs"], dtype=np.int64).reshape(-1, 2))
        if st.pairs.size and (st.pairs.min() < 0 or st.pairs.max() >= n):
            raise ValueError("Haar pair index out of range")
        return st
    if kind == "perm":
        st = Permutation(d["perm"])
        if st.perm.size != n:
            raise ValueError("permutation length mismatch")
        return st
    if kind == "dense":
        st = DenseLeaf(d["offset"], d["matrix"])
        if st.offset < 0 or st.offset + st.size > n:
            raise ValueError("dense leaf out of range")
        return st
    if kind == "scale":
        st = Scale(d["factors"])
        if st.factors.shape != (n,):
            raise ValueError("scale length mismatch")
        return st
    if kind == "givens":
        st = Givens(np.asarray(d["rotations"], dtype=float).reshape(-1, 3))
        p, q = st.indices
        if p.size and (min(p.min(), q.min()) < 0 or max(p.max(), q.max()) >= n):
            raise ValueError("Givens index out of range")
        return st
    raise ValueError(f"unknown stage type {kind!r}")


def serialize(plan: FastGftPlan) -> bytes:
    """Plan JSON; floats are written with ``repr`` and round-trip exactly."""
    data = {
        "n": plan.n,
        "stages": [_stage_to_dict(st) for st in plan.stages],
        "eigenvalues": [float(v) for v in plan.eigenvalues],
    }
    if plan.tree is not None:
        data["provenance"] = plan.tree.to_dict()
    return json.dumps(data).encode()


def deserialize(blob, orth_tol: float = 1e-9) -> FastGftPlan:
    """Load a plan and check that it realizes an orthogonal transform."""
    try:
        data = json.loads(blob)
        n = int(data["n"])
        stages = tuple(_stage_from_dict(d, n) for d in data["stages"])
        lam = np.asarray(data.get("eigenvalues", [0.0] * n), dtype=float)
    except (KeyError, TypeError, IndexError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed plan JSON: {exc}") from exc
    if lam.shape != (n,):
        raise ValueError("eigenvalue count does not match n")
    plan = FastGftPlan(n, stages, lam)
    U = plan.matrix()
    err = float(np.abs(U.T @ U - np.eye(n)).max(initial=0.0))
    if err > orth_tol:
        raise ValueError(f"plan is not orthogonal (max deviation {err:.2e})")
    return plan
