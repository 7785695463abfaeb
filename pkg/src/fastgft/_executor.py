"""Compiled execution of plan stages on node-major signal blocks.

Signals are held node-major, shape ``(n, m)`` with one signal per column, so
every stage is a loop over rows. Permutation stages are folded away: rows of
the working block are labelled by logical position after the last stage that
is not a permutation. The input is gathered into that order, and trailing
permutations are applied while writing the output.

The block has two halves. A dense leaf on a contiguous row range reads one
half and writes the other through a single BLAS call; the compiler tracks
which half holds each row. Leaves on scattered rows go through scratch space.

Columns are processed in blocks of ``CHUNK`` so the working set stays in
cache. Each column sees the same arithmetic whatever block it lands in, so
results do not depend on batch size or thread count.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAAR, DENSE, DENSE_ROWS, SCALE, GIVENS = range(5)

#: Columns per cache block.
CHUNK = 512


class Program:
    """Flat encoding of a stage list.

    ``kinds[t]`` selects the operation; ``idx[i0[t]:i1[t]]`` holds its rows
    in the (2n, C) work block, ``vals[f0[t]:...]`` its numbers and ``ks[t]``
    its size. A ``DENSE`` op stores its source and target start rows.
    """

    def __init__(self, n: int, stages):
        # local imports avoid a cycle with plan.py
        from .plan import DenseLeaf, Givens, Haar, Permutation, Scale

        stages = list(stages)
        tail = len(stages)
        while tail > 0 and isinstance(stages[tail - 1], Permutation):
            tail -= 1
        body, trailing = stages[:tail], stages[tail:]

        # logical position -> row when every row starts at its own index
        loc = np.arange(n)
        for st in body:
            if isinstance(st, Permutation):
                loc = loc[st.perm]
        # relabel rows so the value at logical k after the body sits in row k
        label = np.empty(n, dtype=np.int64)
        label[loc] = np.arange(n)
        self.in_src = loc.astype(np.int64)  # row r starts with input x[loc[r]]

        half = np.zeros(n, dtype=np.int64)  # which half of the block holds each row
        kinds, i0, i1, f0, ks = [], [], [], [], []
        idx: list[np.ndarray] = []
        vals: list[np.ndarray] = []
        ni = nf = 0

        def push(kind, rows, numbers, k):
            nonlocal ni, nf
            rows = np.asarray(rows, dtype=np.int64).ravel()
            numbers = np.asarray(numbers, dtype=float).ravel()
            kinds.append(kind)
            i0.append(ni)
            i1.append(ni + rows.size)
            f0.append(nf)
            ks.append(k)
            idx.append(rows)
            vals.append(numbers)
            ni += rows.size
            nf += numbers.size

        def where(rows):
            return half[rows] * n + rows

        cur = np.arange(n)
        for st in body:
            if isinstance(st, Permutation):
                cur = cur[st.perm]
            elif isinstance(st, Haar):
                if len(st.pairs):
                    push(HAAR, where(label[cur[st.pairs]]), [], len(st.pairs))
            elif isinstance(st, DenseLeaf):
                rows = label[cur[st.offset : st.offset + st.size]]
                k = st.size
                A = np.ascontiguousarray(st.matrix)
                lo = rows[0]
                h = half[lo]
                if np.array_equal(rows, np.arange(lo, lo + k)) and np.all(half[rows] == h):
                    push(DENSE, [h * n + lo, (1 - h) * n + lo], A, k)
                    half[rows] = 1 - h
                else:
                    push(DENSE_ROWS, where(rows), A, k)
            elif isinstance(st, Scale):
                f = np.empty(n)
                f[label[cur]] = st.factors
                keep = np.flatnonzero(f != 1.0)
                if keep.size:
                    push(SCALE, where(keep), f[keep], keep.size)
            elif isinstance(st, Givens):
                p, q = st.indices
                th = st.rotations[:, 2]
                rows = np.stack([label[cur[p]], label[cur[q]]], axis=1)
                push(GIVENS, where(rows), np.stack([np.cos(th), np.sin(th)], axis=1), len(p))
            else:
                raise TypeError(f"unknown stage {type(st).__name__}")

        # a leading Haar op is folded into the load: its pairs are read from
        # the input and combined on the way in
        self.load_pairs = np.zeros((0, 2), dtype=np.int64)
        if kinds and kinds[0] == HAAR:
            self.load_pairs = idx[0].reshape(-1, 2)
            kinds, i0, i1, f0, ks = kinds[1:], i0[1:], i1[1:], f0[1:], ks[1:]
        paired = np.zeros(n, dtype=bool)
        paired[self.load_pairs.ravel()] = True
        self.load_rows = np.flatnonzero(~paired).astype(np.int64)

        out = np.arange(n)
        for st in trailing:
            out = out[st.perm]
        self.out_src = where(out).astype(np.int64)
        self.n = n
        self.kinds = np.asarray(kinds, dtype=np.int64)
        self.i0 = np.asarray(i0, dtype=np.int64)
        self.i1 = np.asarray(i1, dtype=np.int64)
        self.f0 = np.asarray(f0, dtype=np.int64)
        self.ks = np.asarray(ks, dtype=np.int64)
        self.idx = np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)
        self.vals = np.concatenate(vals) if vals else np.zeros(0)
        self.max_k = max([k for k, t in zip(ks, kinds) if t == DENSE_ROWS], default=1)

    def run(self, S: np.ndarray, out: np.ndarray, start: int = 0, stop: int | None = None) -> None:
        """Write coefficients of columns ``start:stop`` of ``S`` (n, m) into ``out``."""
        stop = S.shape[1] if stop is None else stop
        if stop <= start:
            return
        args = (S, out, start, stop, self.in_src, self.load_rows, self.load_pairs, self.out_src, self.kinds, self.i0, self.i1,
                self.f0, self.ks, self.idx, self.vals, self.max_k)
        if _kernel is not None:
            _kernel(*args, CHUNK)
        else:
            _run_numpy(*args)


def _run_numpy(S, out, start, stop, in_src, load_rows, load_pairs, out_src, kinds, i0, i1, f0, ks, idx, vals,
               max_k):
    n = S.shape[0]
    la, lb = load_pairs[:, 0], load_pairs[:, 1]
    for s in range(start, stop, CHUNK):
        e = min(s + CHUNK, stop)
        W = np.zeros((2 * n, e - s))
        W[load_rows] = S[in_src[load_rows], s:e]
        x, y = S[in_src[la], s:e], S[in_src[lb], s:e]
        W[la] = x + y
        W[lb] = x - y
        for t in range(kinds.size):
            kind, k = kinds[t], ks[t]
            rows = idx[i0[t] : i1[t]]
            if kind == HAAR:
                a, b = rows[0::2], rows[1::2]
                x, y = W[a], W[b]
                W[a] = x + y
                W[b] = x - y
            elif kind == DENSE:
                A = vals[f0[t] : f0[t] + k * k].reshape(k, k)
                W[rows[1] : rows[1] + k] = A @ W[rows[0] : rows[0] + k]
            elif kind == DENSE_ROWS:
                A = vals[f0[t] : f0[t] + k * k].reshape(k, k)
                W[rows] = A @ W[rows]
            elif kind == SCALE:
                W[rows] *= vals[f0[t] : f0[t] + k][:, None]
            else:
                cs = vals[f0[t] : f0[t] + 2 * k].reshape(k, 2)
                a, b = rows[0::2], rows[1::2]
                x, y = W[a], W[b]
                c, sn = cs[:, :1], cs[:, 1:]
                W[a] = c * x + sn * y
                W[b] = c * y - sn * x
        out[:, s:e] = W[out_src]


def _make_kernel():
    @numba.njit(nogil=True, cache=True)
    def kernel(S, out, start, stop, in_src, load_rows, load_pairs, out_src, kinds, i0, i1, f0, ks, idx, vals,
               max_k, C):
        n = S.shape[0]
        W = np.zeros((2 * n, C))
        src = np.zeros((max_k, C))
        dst = np.zeros((max_k, C))
        for s in range(start, stop, C):
            m = min(C, stop - s)
            # slice views first: offset indexing inside the loop blocks vectorization
            for u in range(load_rows.size):
                r = load_rows[u]
                b = W[r]
                x = S[in_src[r], s : s + m]
                for j in range(m):
                    b[j] = x[j]
            for u in range(load_pairs.shape[0]):
                ra = load_pairs[u, 0]
                rb = load_pairs[u, 1]
                a = W[ra]
                b = W[rb]
                xa = S[in_src[ra], s : s + m]
                xb = S[in_src[rb], s : s + m]
                for j in range(m):
                    x = xa[j]
                    y = xb[j]
                    a[j] = x + y
                    b[j] = x - y
            for t in range(kinds.size):
                kind = kinds[t]
                k = ks[t]
                base = i0[t]
                fb = f0[t]
                if kind == HAAR:
                    for u in range(k):
                        a = W[idx[base + 2 * u]]
                        b = W[idx[base + 2 * u + 1]]
                        for j in range(m):
                            x = a[j]
                            y = b[j]
                            a[j] = x + y
                            b[j] = x - y
                elif kind == DENSE:
                    # full block width keeps every column on the same BLAS path
                    lo = idx[base]
                    hi = idx[base + 1]
                    np.dot(vals[fb : fb + k * k].reshape(k, k), W[lo : lo + k], W[hi : hi + k])
                elif kind == DENSE_ROWS:
                    for c in range(k):
                        a = W[idx[base + c]]
                        x = src[c]
                        for j in range(m):
                            x[j] = a[j]
                    np.dot(vals[fb : fb + k * k].reshape(k, k), src[:k], dst[:k])
                    for r in range(k):
                        a = W[idx[base + r]]
                        x = dst[r]
                        for j in range(m):
                            a[j] = x[j]
                elif kind == SCALE:
                    for u in range(k):
                        a = W[idx[base + u]]
                        f = vals[fb + u]
                        for j in range(m):
                            a[j] *= f
                else:
                    for u in range(k):
                        a = W[idx[base + 2 * u]]
                        b = W[idx[base + 2 * u + 1]]
                        c = vals[fb + 2 * u]
                        sn = vals[fb + 2 * u + 1]
                        for j in range(m):
                            x = a[j]
                            y = b[j]
                            a[j] = c * x + sn * y
                            b[j] = c * y - sn * x
            for r in range(n):
                b = W[out_src[r]]
                o = out[r, s : s + m]
                for j in range(m):
                    o[j] = b[j]

    return kernel


_kernel = _make_kernel() if numba is not None else None
