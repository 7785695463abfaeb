"""Approximate GFTs from layers of parallel Givens rotations, and error metrics.

``truncated_jacobi`` runs a greedy parallel Jacobi diagonalization for a fixed
number of layers. Each layer rotates a set of disjoint index pairs, picked
greedily by the magnitude of the current off-diagonal entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decompose import decompose
from .graph import Graph, laplacian
from .plan import FastGftPlan, Givens, Haar, Permutation, PlanStage, Scale, _coefficient_order
from .symmetry import partition

__all__ = [
    "GivensLayer",
    "ApproxGftPlan",
    "ErrorMetrics",
    "truncated_jacobi",
    "delta_error",
    "epsilon_error",
    "error_metrics",
    "haar_plus_approx",
]

#: Hard cap on layers when ``J`` is None (run to convergence).
MAX_LAYERS = 10_000


@dataclass(frozen=True)
class GivensLayer:
    """Disjoint rotations ``(p, q, theta)`` applied together.

    The layer maps ``w[p], w[q]`` to ``c w[p] + s w[q], -s w[p] + c w[q]``,
    i.e. it applies ``Theta^T`` where ``Theta`` has ``c`` on the (p, p) and
    (q, q) slots, ``s`` at (q, p) and ``-s`` at (p, q).
    """

    rotations: tuple[tuple[int, int, float], ...]

    def matrix(self, n: int) -> np.ndarray:
        """The orthogonal ``Theta`` of this layer (product of its rotations)."""
        T = np.eye(n)
        for p, q, th in self.rotations:
            c, s = math.cos(th), math.sin(th)
            T[p, p] = T[q, q] = c
            T[q, p] = s
            T[p, q] = -s
        return T

    def to_stage(self, offset: int = 0) -> Givens:
        return Givens([(p + offset, q + offset, th) for p, q, th in self.rotations])


@dataclass(frozen=True)
class ApproxGftPlan:
    """Givens layers followed by an ascending sort of the approximate eigenvalues."""

    n: int
    layers: tuple[GivensLayer, ...]
    perm: np.ndarray
    diagonal: np.ndarray  # approximate eigenvalues in output order

    def to_plan(self) -> FastGftPlan:
        stages: list[PlanStage] = [layer.to_stage() for layer in self.layers if layer.rotations]
        if not np.array_equal(self.perm, np.arange(self.n)):
            stages.append(Permutation(self.perm))
        return FastGftPlan(self.n, tuple(stages), self.diagonal.copy())

    def matrix(self) -> np.ndarray:
        """Approximate GFT matrix ``U_hat`` (columns are basis vectors)."""
        U = np.eye(self.n)
        for layer in self.layers:
            U = U @ layer.matrix(self.n)
        return U[:, self.perm]

    @property
    def num_rotations(self) -> int:
        return sum(len(layer.rotations) for layer in self.layers)


@dataclass(frozen=True)
class ErrorMetrics:
    delta: float
    epsilon: float


def _jacobi_angle(app: float, aqq: float, apq: float) -> float:
    """Angle in [-pi/4, pi/4] whose rotation zeroes the (p, q) entry."""
    psi = (app - aqq) / (2.0 * apq)
    t = math.copysign(1.0, psi) / (abs(psi) + math.hypot(1.0, psi))
    return math.atan(t)


def _greedy_pairs(A: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    n = A.shape[0]
    iu, ju = np.triu_indices(n, 1)
    mag = np.abs(A[iu, ju])
    keep = np.flatnonzero(mag > threshold)
    order = keep[np.argsort(-mag[keep], kind="stable")]
    used = np.zeros(n, dtype=bool)
    pairs = []
    for k in order:
        p, q = int(iu[k]), int(ju[k])
        if not (used[p] or used[q]):
            used[p] = used[q] = True
            pairs.append((p, q))
            if len(pairs) == n // 2:
                break
    return pairs


def truncated_jacobi(L, J: Optional[int]) -> ApproxGftPlan:
    """Greedy parallel Jacobi with ``J`` layers (``None``: until diagonal).

    Each layer repeatedly takes the largest remaining off-diagonal entry whose
    indices are both unused, until no entry above ``1e-14 * max(1, max|L|)``
    is left, then rotates all chosen pairs with the angles that zero them.
    """
    A = np.array(L, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("L must be a symmetric square matrix")
    if J is not None and J < 0:
        raise ValueError("layer count must be nonnegative")
    threshold = 1e-14 * max(1.0, float(np.abs(A).max(initial=0.0)))
    layers = []
    limit = MAX_LAYERS if J is None else J
    while len(layers) < limit:
        pairs = _greedy_pairs(A, threshold)
        if not pairs:
            break
        p = np.array([a for a, _ in pairs])
        q = np.array([b for _, b in pairs])
        th = np.array([_jacobi_angle(A[a, a], A[b, b], A[a, b]) for a, b in pairs])
        c, s = np.cos(th), np.sin(th)
        Ap, Aq = A[p, :].copy(), A[q, :].copy()
        A[p, :] = c[:, None] * Ap + s[:, None] * Aq
        A[q, :] = -s[:, None] * Ap + c[:, None] * Aq
        Ap, Aq = A[:, p].copy(), A[:, q].copy()
        A[:, p] = Ap * c + Aq * s
        A[:, q] = -Ap * s + Aq * c
        A[p, q] = A[q, p] = 0.0
        layers.append(GivensLayer(tuple((int(a), int(b), float(t)) for a, b, t in zip(p, q, th))))
    diag = np.diag(A).copy()
    perm = _coefficient_order(diag)
    return ApproxGftPlan(n, tuple(layers), perm, diag[perm])


def _check_pair(U_hat, U) -> tuple[np.ndarray, np.ndarray]:
    U_hat = np.asarray(U_hat, dtype=float)
    U = np.asarray(U, dtype=float)
    if U_hat.ndim != 2 or U_hat.shape != U.shape or U.shape[0] != U.shape[1]:
        raise ValueError(f"bases must be square and equal in shape, got {U_hat.shape} and {U.shape}")
    return U_hat, U


def delta_error(U_hat, U) -> float:
    """Sign-normalized relative error ``||abs(U_hat^T U) - I||_F / sqrt(n)``."""
    U_hat, U = _check_pair(U_hat, U)
    n = U.shape[0]
    return float(np.linalg.norm(np.abs(U_hat.T @ U) - np.eye(n)) / math.sqrt(n))


def epsilon_error(U_hat, U, X) -> float:
    """Mean over signals (rows of X) of ``sum_j (|u_j^T x| - |u_hat_j^T x|)^2``."""
    U_hat, U = _check_pair(U_hat, U)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("need at least one signal")
    if X.shape[1] != U.shape[0]:
        raise ValueError(f"signal length {X.shape[1]} does not match basis size {U.shape[0]}")
    diff = np.abs(X @ U) - np.abs(X @ U_hat)
    return float(np.mean(np.sum(diff * diff, axis=1)))


def error_metrics(U_hat, U, X) -> ErrorMetrics:
    return ErrorMetrics(delta_error(U_hat, U), epsilon_error(U_hat, U, X))


def haar_plus_approx(g: Graph, phi: Sequence[int], J: Optional[int]) -> FastGftPlan:
    """One Haar stage from ``phi`` followed by ``J`` Givens layers on each half.

    The sum and difference Laplacians are each approximately diagonalized by
    :func:`truncated_jacobi`; the difference graph is treated as a whole even
    when it is disconnected.
    """
    dec = decompose(g, phi)
    part = partition(phi)
    n = g.n
    x = np.asarray(part.vx, dtype=np.int64)
    y = np.asarray(part.vy, dtype=np.int64)
    stages: list[PlanStage] = []
    if x.size:
        stages.append(Haar(np.stack([x, y], axis=1)))
        f = np.ones(n)
        f[x] = f[y] = 1.0 / math.sqrt(2.0)
        stages.append(Scale(f))
    order = np.asarray(dec.plus_nodes + dec.minus_nodes, dtype=np.int64)
    if not np.array_equal(order, np.arange(n)):
        stages.append(Permutation(order))
    n_plus = len(dec.plus_nodes)
    diag = []
    for sub, offset in ((dec.g_plus, 0), (dec.g_minus, n_plus)):
        if sub.n == 0:
            continue
        approx = truncated_jacobi(laplacian(sub), J)
        stages.extend(layer.to_stage(offset) for layer in approx.layers if layer.rotations)
        # undo the sub-plan's sort so the combined sort below sees plan order
        d = np.empty(sub.n)
        d[approx.perm] = approx.diagonal
        diag.append(d)
    lam = np.concatenate(diag)
    perm = _coefficient_order(lam)
    if not np.array_equal(perm, np.arange(n)):
        stages.append(Permutation(perm))
    return FastGftPlan(n, tuple(stages), lam[perm])
