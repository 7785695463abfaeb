"""Dense symmetric eigensolver and graph Fourier bases.

``jacobi_eigh`` is a cyclic Jacobi method in round-robin (tournament)
ordering: each round rotates ``n/2`` disjoint index pairs at once, so a round
is a handful of vectorized row/column updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, is_bipartite, is_k_regular_bipartite, laplacian, normalized_laplacian

__all__ = [
    "Spectrum",
    "RightHaarFactor",
    "ConvergenceError",
    "jacobi_eigh",
    "gft",
    "normalize_signs",
    "right_haar_gft",
    "right_haar_gft_normalized",
    "reorder_bipartite",
    "subspace_distance",
    "eigenvalue_clusters",
    "butterfly_matrix",
]


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class RightHaarFactor:
    """``U = diag(E, F) @ B_{n,p}`` with ``E`` of size n-p and ``F`` of size p."""

    e_block: np.ndarray
    f_block: np.ndarray
    p: int

    def matrix(self) -> np.ndarray:
        n = self.e_block.shape[0] + self.p
        D = np.zeros((n, n))
        D[: n - self.p, : n - self.p] = self.e_block
        D[n - self.p :, n - self.p :] = self.f_block
        return D @ butterfly_matrix(n, self.p)


def butterfly_matrix(n: int, p: int) -> np.ndarray:
    """``B_{n,p}``: p Haar units on (i, n-1-i) with the middle passed through."""
    if not 0 <= 2 * p <= n:
        raise ValueError("need 0 <= 2p <= n")
    B = np.eye(n)
    r = 1.0 / np.sqrt(2.0)
    for i in range(p):
        j = n - 1 - i
        B[i, i] = r
        B[j, j] = -r
        B[i, j] = B[j, i] = r
    return B


def _round_robin(m: int):
    """Pairings for a round-robin over m (even) players: m-1 rounds of m/2 pairs."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        rounds.append((np.array(players[:half]), np.array(players[half:][::-1])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _offdiag_norm(A: np.ndarray) -> float:
    # direct sum; subtracting the diagonal mass from the total cancels badly
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off))


def jacobi_eigh(M, tol: float = 1e-12, max_sweeps: int = 100) -> Spectrum:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm is at most ``tol * ||M||_F``.
    Raises ``ValueError`` for non-symmetric input and ``ConvergenceError``
    after ``max_sweeps`` sweeps.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    if n <= 1:
        return Spectrum(np.diag(A).copy(), V)
    target = tol * float(np.linalg.norm(A))
    m = n + (n % 2)
    rounds = []
    for top, bot in _round_robin(m):
        keep = (top < n) & (bot < n)
        p, q = np.minimum(top, bot)[keep], np.maximum(top, bot)[keep]
        rounds.append((p, q))

    sweeps = 0
    while _offdiag_norm(A) > target:
        if sweeps == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            # rotation with columns c*e_p + s*e_q and -s*e_p + c*e_q zeroing A[p, q]
            psi = (app - aqq) / (2.0 * apq)
            t = np.where(psi >= 0, 1.0, -1.0) / (np.abs(psi) + np.hypot(1.0, psi))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap + s[:, None] * Aq
            A[q, :] = -s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c + Aq * s
            A[:, q] = -Ap * s + Aq * c
            A[p, q] = A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * c + Vq * s
            V[:, q] = -Vp * s + Vq * c

    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], V[:, order])


def normalize_signs(U: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Flip columns so the first entry with magnitude above ``tol`` is positive."""
    U = np.array(U, dtype=float)
    for k in range(U.shape[1]):
        big = np.flatnonzero(np.abs(U[:, k]) > tol)
        if big.size and U[big[0], k] < 0:
            U[:, k] = -U[:, k]
    return U


def gft(g: Graph) -> Spectrum:
    """Laplacian eigenbasis with the first-significant-entry-positive convention."""
    spec = jacobi_eigh(laplacian(g))
    return Spectrum(spec.eigenvalues, normalize_signs(spec.eigenvectors))


def eigenvalue_clusters(eigenvalues, cluster_tol: float = 1e-8) -> list[np.ndarray]:
    """Index groups of sorted eigenvalues separated by gaps larger than ``cluster_tol``."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        return []
    scale = max(1.0, float(np.abs(lam).max()))
    cuts = np.flatnonzero(np.diff(lam) > cluster_tol * scale) + 1
    return np.split(np.arange(lam.size), cuts)


def subspace_distance(U1, U2, eigenvalues, cluster_tol: float = 1e-8) -> float:
    """Largest principal-angle sine between matching eigenspaces of two bases.

    Columns are grouped by eigenvalue cluster; the result is zero exactly when
    both bases span the same eigenspaces, whatever basis is chosen within each.
    """
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if U1.shape != U2.shape or U1.shape[1] != len(eigenvalues):
        raise ValueError("basis shapes and eigenvalue count must agree")
    worst = 0.0
    for idx in eigenvalue_clusters(eigenvalues, cluster_tol):
        A, B = U1[:, idx], U2[:, idx]
        # sine of the largest principal angle = norm of B's component outside span(A)
        resid = B - A @ (A.T @ B)
        worst = max(worst, float(np.linalg.norm(resid, 2)))
    return worst


def reorder_bipartite(g: Graph) -> tuple[Graph, list[int]]:
    """Relabel a bipartite graph so the larger part comes first.

    Returns the relabelled graph and ``order`` with new node k = old ``order[k]``.
    """
    parts = is_bipartite(g)
    if parts is None:
        raise ValueError("graph is not bipartite")
    s1, s2 = list(parts.s1), list(parts.s2)
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    order = s1 + s2
    return g.permuted(order), order


def _split_crossed(g: Graph, m: int) -> bool:
    return all((i < m) != (j < m) for i, j in g.edges)


def _leading_part_size(g: Graph) -> int:
    """Size of the first part if the nodes are ordered part-by-part, else raise."""
    parts = is_bipartite(g)
    if parts is None:
        raise ValueError("graph is not bipartite")
    m = max(len(parts.s1), len(parts.s2))
    if not _split_crossed(g, m):
        raise ValueError("nodes must be ordered with the larger part first; see reorder_bipartite")
    return m


def _orthonormal_basis(Q: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis for the column span of Q (Gram-Schmidt with re-orthogonalization)."""
    basis: list[np.ndarray] = []
    for v in Q.T:
        for _ in range(2):
            for b in basis:
                v = v - (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > tol:
            basis.append(v / nrm)
    return np.array(basis).T if basis else np.zeros((Q.shape[0], 0))


def _right_haar(M: np.ndarray, m: int, center: float) -> tuple[RightHaarFactor, Spectrum]:
    """Eigenbasis of M paired under the sign flip of the last n-m coordinates.

    The flip maps an eigenvector with eigenvalue ``lam`` to one with
    ``2*center - lam``. Eigenvectors below ``center`` are paired with their
    flips; the ``center`` eigenspace splits into top-only and bottom-only
    vectors, which are paired with each other and the leftover top-only
    vectors fill the middle columns.
    """
    n = M.shape[0]
    p = n - m
    spec = jacobi_eigh(M)
    lam, V = spec.eigenvalues, spec.eigenvectors
    scale = max(1.0, float(np.abs(lam).max()))
    flip = np.ones(n)
    flip[m:] = -1.0

    low, mid_top = [], []
    for idx in eigenvalue_clusters(lam):
        val = float(lam[idx].mean())
        if val < center - 1e-8 * scale:
            for v in V[:, idx].T:
                low.append((val, v, False))
        elif abs(val - center) <= 1e-8 * scale:
            Q = V[:, idx]
            T = _orthonormal_basis(np.vstack([Q[:m], np.zeros((p, Q.shape[1]))]))
            Bt = _orthonormal_basis(np.vstack([np.zeros((m, Q.shape[1])), Q[m:]]))
            for k in range(Bt.shape[1]):
                low.append((val, (T[:, k] + Bt[:, k]) / np.sqrt(2.0), True))
            mid_top.extend((val, T[:, k]) for k in range(Bt.shape[1], T.shape[1]))
    if len(low) != p or len(mid_top) != n - 2 * p:
        raise ValueError("eigenvectors do not pair under the bipartite sign flip")

    U = np.zeros((n, n))
    eig = np.zeros(n)
    for k, (val, v, at_center) in enumerate(low):
        U[:, k] = v
        U[:, n - 1 - k] = flip * v
        # a pair inside the center cluster keeps one value so the order stays monotone
        eig[k], eig[n - 1 - k] = val, val if at_center else 2.0 * center - val
    for k, (val, v) in enumerate(mid_top):
        U[:, p + k] = v
        eig[p + k] = val
    D = U @ butterfly_matrix(n, p)
    factor = RightHaarFactor(D[:m, :m].copy(), D[m:, m:].copy(), p)
    return factor, Spectrum(eig, U)


def right_haar_gft(g: Graph) -> tuple[RightHaarFactor, Spectrum]:
    """GFT of a k-regular bipartite graph ending in ``n/2`` right Haar units.

    Nodes must be ordered with one part on the first ``n/2`` indices.
    """
    found = is_k_regular_bipartite(g)
    if found is None:
        raise ValueError("graph is not k-regular bipartite")
    _, k = found
    m = g.n // 2
    if not _split_crossed(g, m):
        raise ValueError("nodes must be ordered with one part on the first n/2 indices")
    return _right_haar(laplacian(g), m, k)


def right_haar_gft_normalized(g: Graph) -> tuple[RightHaarFactor, Spectrum]:
    """Normalized-Laplacian GFT of a bipartite graph with ``|S2|`` right Haar units.

    Nodes must be ordered with the larger part first (``reorder_bipartite``).
    """
    if g.has_self_loops():
        raise ValueError("self-loops break the bipartite eigenvalue pairing")
    m = _leading_part_size(g)
    return _right_haar(normalized_laplacian(g), m, 1.0)
