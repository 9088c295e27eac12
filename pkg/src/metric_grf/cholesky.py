"""Sparse Cholesky factorisation in the given (natural) ordering.

Up-looking algorithm driven by the elimination tree: the symbolic pass counts
the nonzeros of every column of L, the numeric pass computes row k of L from a
sparse triangular solve whose pattern is the row's reach in the tree. No
fill-reducing permutation is applied, so the factor carries whatever fill the
input ordering produces.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numba import njit


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


@njit(cache=True)
def _etree(Ap, Ai, n):
    parent = np.full(n, -1, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            while i != -1 and i < k:
                nxt = ancestor[i]
                ancestor[i] = k
                if nxt == -1:
                    parent[i] = k
                i = nxt
    return parent


@njit(cache=True)
def _ereach(Ap, Ai, k, parent, stack, mark):
    """Pattern of row k of L (excluding the diagonal) in topological order.

    Stored in stack[top:n]; returns top.
    """
    n = parent.shape[0]
    top = n
    mark[k] = k
    for p in range(Ap[k], Ap[k + 1]):
        i = Ai[p]
        if i > k:
            continue
        length = 0
        while mark[i] != k:
            stack[length] = i
            length += 1
            mark[i] = k
            i = parent[i]
        while length > 0:
            top -= 1
            length -= 1
            stack[top] = stack[length]
    return top


@njit(cache=True)
def _column_counts(Ap, Ai, parent):
    n = parent.shape[0]
    counts = np.ones(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        top = _ereach(Ap, Ai, k, parent, stack, mark)
        for t in range(top, n):
            counts[stack[t]] += 1
    return counts


@njit(cache=True)
def _numeric(Ap, Ai, Ax, parent, Lp, Li, Lx):
    """Fill Li/Lx; returns -1 on success or the column with a non-positive pivot."""
    n = parent.shape[0]
    nxt = Lp[:n].copy()
    x = np.zeros(n)
    stack = np.empty(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        top = _ereach(Ap, Ai, k, parent, stack, mark)
        x[k] = 0.0
        for p in range(Ap[k], Ap[k + 1]):
            if Ai[p] <= k:
                x[Ai[p]] = Ax[p]
        d = x[k]
        x[k] = 0.0
        for t in range(top, n):
            i = stack[t]
            lki = x[i] / Lx[Lp[i]]
            x[i] = 0.0
            for p in range(Lp[i] + 1, nxt[i]):
                x[Li[p]] -= Lx[p] * lki
            d -= lki * lki
            p = nxt[i]
            nxt[i] += 1
            Li[p] = k
            Lx[p] = lki
        if d <= 0.0:
            return k
        p = nxt[k]
        nxt[k] += 1
        Li[p] = k
        Lx[p] = np.sqrt(d)
    return -1


def symbolic_nnz(A) -> int:
    """Number of nonzeros the Cholesky factor of ``A`` will have."""
    U = sp.triu(sp.csc_matrix(A), format="csc")
    U.sum_duplicates()
    parent = _etree(U.indptr.astype(np.int64), U.indices.astype(np.int64), U.shape[0])
    return int(_column_counts(U.indptr.astype(np.int64), U.indices.astype(np.int64), parent).sum())


def sparse_cholesky(A) -> sp.csc_matrix:
    """Lower-triangular L with ``A = L L^T`` for a symmetric positive definite ``A``."""
    A = sp.csc_matrix(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    U = sp.triu(A, format="csc")
    U.sum_duplicates()
    Ap = U.indptr.astype(np.int64)
    Ai = U.indices.astype(np.int64)
    Ax = U.data
    parent = _etree(Ap, Ai, n)
    counts = _column_counts(Ap, Ai, parent)
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=Lp[1:])
    Li = np.empty(Lp[-1], dtype=np.int64)
    Lx = np.empty(Lp[-1])
    bad = _numeric(Ap, Ai, Ax, parent, Lp, Li, Lx)
    if bad >= 0:
        raise NotPositiveDefiniteError(f"non-positive pivot at column {bad}")
    return sp.csc_matrix((Lx, Li, Lp), shape=(n, n))
