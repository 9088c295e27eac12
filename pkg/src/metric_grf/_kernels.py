# Compiled inner loops. Tridiagonal systems are stored back to back in flat
# arrays: system s occupies [start[s], start[s] + size[s]); lo[b + i] is the
# entry (i + 1, i) and up[b + i] the entry (i, i + 1) of the system at b.
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def factor_systems(diag, lo, up, start, size, dprime, lprime):
    """Thomas LU of every system; returns the index of a system with a zero pivot or -1."""
    for s in range(start.shape[0]):
        b = start[s]
        n = size[s]
        if n == 0:
            continue
        dprime[b] = diag[b]
        if dprime[b] == 0.0:
            return s
        for i in range(1, n):
            lprime[b + i - 1] = lo[b + i - 1] / dprime[b + i - 1]
            dprime[b + i] = diag[b + i] - lprime[b + i - 1] * up[b + i - 1]
            if dprime[b + i] == 0.0:
                return s
    return -1


@njit(inline="always")
def _substitute(dprime, lprime, up, b, n, x):
    # forward: L y = rhs (unit lower bidiagonal)
    for i in range(1, n):
        x[b + i] -= lprime[b + i - 1] * x[b + i - 1]
    # backward: U x = y
    x[b + n - 1] /= dprime[b + n - 1]
    for i in range(n - 2, -1, -1):
        x[b + i] = (x[b + i] - up[b + i] * x[b + i + 1]) / dprime[b + i]


@njit(**_OPTS)
def solve_systems(dprime, lprime, up, start, size, x):
    """Overwrite each system's slice of ``x`` with the solution."""
    for s in range(start.shape[0]):
        n = size[s]
        if n > 0:
            _substitute(dprime, lprime, up, start[s], n, x)


@njit(**_OPTS)
def condense(W, nint, ioff, head, tail,
             dp, lp, up, ch, ct, work, g):
    """g = W_G - sum_e scatter(A_GI A_II^{-1} W_I); g holds W_G on entry."""
    for e in range(nint.shape[0]):
        n = nint[e]
        if n == 0:
            continue
        b = ioff[e]
        for i in range(n):
            work[b + i] = W[b + i]
        _substitute(dp, lp, up, b, n, work)
        g[head[e]] -= ch[e] * work[b]
        g[tail[e]] -= ct[e] * work[b + n - 1]


@njit(**_OPTS)
def schur_apply(u, nint, ioff, head, tail, vh, vt,
                dp, lp, up, ch, ct, work, out):
    """out = S u, computed edge by edge with one Dirichlet solve per edge."""
    for v in range(out.shape[0]):
        out[v] = 0.0
    for e in range(nint.shape[0]):
        a = head[e]
        c = tail[e]
        ua = u[a]
        uc = u[c]
        ya = vh[e] * ua
        yc = vt[e] * uc
        n = nint[e]
        if n == 0:
            ya += ch[e] * uc
            yc += ch[e] * ua
        else:
            b = ioff[e]
            for i in range(n):
                work[b + i] = 0.0
            work[b] += ch[e] * ua
            work[b + n - 1] += ct[e] * uc
            _substitute(dp, lp, up, b, n, work)
            ya -= ch[e] * work[b]
            yc -= ct[e] * work[b + n - 1]
        out[a] += ya
        out[c] += yc


@njit(**_OPTS)
def neumann_step(r, inv_deg, nint, fstart, head, tail,
                 fdp, flp, fup, work, out):
    """out = D^-1 (sum_e S_e^-1) D^-1 r via full-edge Neumann solves."""
    for v in range(out.shape[0]):
        out[v] = 0.0
    for e in range(nint.shape[0]):
        a = head[e]
        c = tail[e]
        b = fstart[e]
        n = nint[e] + 2
        for i in range(n):
            work[b + i] = 0.0
        work[b] = r[a] * inv_deg[a]
        work[b + n - 1] = r[c] * inv_deg[c]
        _substitute(fdp, flp, fup, b, n, work)
        out[a] += work[b] * inv_deg[a]
        out[c] += work[b + n - 1] * inv_deg[c]


@njit(**_OPTS)
def recover_interior(W, uG, nint, ioff, head, tail,
                     dp, lp, up, ch, ct, out):
    for e in range(nint.shape[0]):
        n = nint[e]
        if n == 0:
            continue
        b = ioff[e]
        for i in range(n):
            out[b + i] = W[b + i]
        out[b] -= ch[e] * uG[head[e]]
        out[b + n - 1] -= ct[e] * uG[tail[e]]
        _substitute(dp, lp, up, b, n, out)

