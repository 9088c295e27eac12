"""Neumann-Neumann domain decomposition for one quadrature step.

Every edge is a subdomain. Interior unknowns are eliminated with cached Thomas
factorisations, the resulting Schur complement system on the topological
vertices is solved by matrix-free PCG, and interior values are recovered
afterwards. No global matrix is formed on this path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .assembly import MassMatrix, OperatorBlocks, StiffnessMatrix, operator_blocks
from .graph import degrees
from .mesh import Mesh


class ZeroPivotError(ArithmeticError):
    """Thomas elimination hit a zero pivot; the system was not SPD."""


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"PCG did not converge in {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


# ---------------------------------------------------------------------------
# Thomas algorithm on a single system


@dataclass(frozen=True)
class ThomasFactorization:
    """A = L U with L unit lower bidiagonal (sub-diagonal ``lower``) and
    U upper bidiagonal (diagonal ``diag``, super-diagonal ``upper``)."""

    diag: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def solve(self, rhs) -> np.ndarray:
        return thomas_solve(self, rhs)

    def L(self) -> np.ndarray:
        return np.eye(self.size) + np.diag(self.lower, -1)

    def U(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.upper, 1)


def _single(n):
    return np.zeros(1, dtype=np.int64), np.array([n], dtype=np.int64)


def _pad(a, n):
    out = np.zeros(max(n, 1))
    out[: len(a)] = a
    return out


def thomas_factorize(d, lo, up) -> ThomasFactorization:
    d = np.asarray(d, dtype=np.float64)
    n = len(d)
    lo = np.asarray(lo, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    if len(lo) != max(n - 1, 0) or len(up) != max(n - 1, 0):
        raise ValueError("off-diagonals must have length n - 1")
    if n == 0:
        return ThomasFactorization(np.empty(0), np.empty(0), np.empty(0))
    start, size = _single(n)
    dp = np.empty(n)
    lp = np.zeros(n)
    if _kernels.factor_systems(d, _pad(lo, n), _pad(up, n), start, size, dp, lp) >= 0:
        raise ZeroPivotError("zero pivot in tridiagonal factorisation")
    return ThomasFactorization(dp, lp[: n - 1], up.copy())


def thomas_solve(f: ThomasFactorization, rhs) -> np.ndarray:
    x = np.array(rhs, dtype=np.float64)
    if x.shape != (f.size,):
        raise ValueError(f"right-hand side has shape {x.shape}, expected ({f.size},)")
    if f.size == 0:
        return x
    start, size = _single(f.size)
    _kernels.solve_systems(f.diag, _pad(f.lower, f.size), _pad(f.upper, f.size), start, size, x)
    return x


# ---------------------------------------------------------------------------
# Per-step operator with cached factorisations


@dataclass(eq=False)
class StepOperator:
    """Local edge operators of ``A = c_I M_w + c_L (kappa^2 M_w + G)``, factored once.

    Holds, per edge, the Thomas factorisation of the interior block ``A_II`` and
    of the full edge operator reordered as [head, interior..., tail]. Both are
    reused by condensation, every Schur product, every preconditioner
    application and the interior recovery.
    """

    blocks: OperatorBlocks
    degree: np.ndarray
    factorizations: int = 0
    schur_products: int = 0
    preconditioner_calls: int = 0

    def __post_init__(self):
        m = self.blocks.mesh
        self.mesh = m
        self.nint = np.ascontiguousarray(m.interior_count, dtype=np.int64)
        self.ioff = np.ascontiguousarray(m.interior_offset, dtype=np.int64)
        self.head = np.ascontiguousarray(m.graph.heads, dtype=np.int64)
        self.tail = np.ascontiguousarray(m.graph.tails, dtype=np.int64)
        self.inv_deg = 1.0 / self.degree.astype(np.float64)
        b = self.blocks
        self.ch = np.ascontiguousarray(b.coupling_head)
        self.ct = np.ascontiguousarray(b.coupling_tail)
        self.vh = np.ascontiguousarray(b.vertex_head)
        self.vt = np.ascontiguousarray(b.vertex_tail)
        T = m.total_interior
        E = m.num_edges

        # interior blocks A_II
        self.up = np.ascontiguousarray(b.off)
        self.dp = np.empty(T)
        self.lp = np.zeros(T)
        if _kernels.factor_systems(b.diag, self.up, self.up, self.ioff, self.nint, self.dp, self.lp) >= 0:
            raise ZeroPivotError("interior edge block is singular")

        # full edge operators, permuted to [head, interior..., tail]
        self.fstart = self.ioff + 2 * np.arange(E, dtype=np.int64)
        fsize = self.nint + 2
        edge_of = np.repeat(np.arange(E), self.nint)
        pos = np.arange(T) + 2 * edge_of + 1
        fdiag = np.empty(T + 2 * E)
        fdiag[pos] = b.diag
        fdiag[self.fstart] = self.vh
        fdiag[self.fstart + fsize - 1] = self.vt
        self.fup = np.zeros(T + 2 * E)
        self.fup[pos] = b.off
        self.fup[self.fstart + fsize - 2] = self.ct
        self.fup[self.fstart] = self.ch
        self.fdp = np.empty(T + 2 * E)
        self.flp = np.zeros(T + 2 * E)
        self.factorizations += E
        # a pure-stiffness step (c_I = 0, kappa = 0) still condenses fine; only the
        # preconditioner needs these factors, so report the failure there
        self._neumann_ok = _kernels.factor_systems(
            fdiag, self.fup, self.fup, self.fstart, fsize, self.fdp, self.flp) < 0
        if self._neumann_ok:
            self.factorizations += E

        self._work = np.empty(T)
        self._fwork = np.empty(T + 2 * E)

    @classmethod
    def build(cls, mesh: Mesh, M_w: MassMatrix, G: StiffnessMatrix,
              kappa: float, c_I: float, c_L: float, degree=None) -> "StepOperator":
        if degree is None:
            degree = degrees(mesh.graph)
        return cls(operator_blocks(mesh, M_w, G, kappa, c_I, c_L), np.asarray(degree))

    @property
    def num_vertices(self) -> int:
        return self.mesh.num_vertices

    def interior_factorization(self, e: int) -> ThomasFactorization:
        s = self.mesh.interior_slice(e)
        return ThomasFactorization(self.dp[s].copy(), self.lp[s][:-1].copy(), self.up[s][:-1].copy())

    def _require_neumann(self):
        if not self._neumann_ok:
            raise ZeroPivotError("local Neumann problem is singular")

    def neumann_factorization(self, e: int) -> ThomasFactorization:
        self._require_neumann()
        b = int(self.fstart[e])
        n = int(self.nint[e]) + 2
        s = slice(b, b + n)
        return ThomasFactorization(self.fdp[s].copy(), self.flp[s][:-1].copy(), self.fup[s][:-1].copy())

    def condense(self, W) -> np.ndarray:
        W = np.ascontiguousarray(W, dtype=np.float64)
        T = self.mesh.total_interior
        g = W[T:].copy()
        _kernels.condense(W, self.nint, self.ioff, self.head, self.tail,
                          self.dp, self.lp, self.up, self.ch, self.ct, self._work, g)
        return g

    def schur_apply(self, u) -> np.ndarray:
        u = np.ascontiguousarray(u, dtype=np.float64)
        out = np.empty(self.num_vertices)
        _kernels.schur_apply(u, self.nint, self.ioff, self.head, self.tail, self.vh, self.vt,
                             self.dp, self.lp, self.up, self.ch, self.ct, self._work, out)
        self.schur_products += 1
        return out

    def precondition(self, r) -> np.ndarray:
        self._require_neumann()
        r = np.ascontiguousarray(r, dtype=np.float64)
        out = np.empty(self.num_vertices)
        _kernels.neumann_step(r, self.inv_deg, self.nint, self.fstart, self.head, self.tail,
                              self.fdp, self.flp, self.fup, self._fwork, out)
        self.preconditioner_calls += 1
        return out

    def recover(self, u_gamma, W) -> np.ndarray:
        W = np.ascontiguousarray(W, dtype=np.float64)
        u_gamma = np.ascontiguousarray(u_gamma, dtype=np.float64)
        out = np.empty(self.mesh.total_interior)
        _kernels.recover_interior(W, u_gamma, self.nint, self.ioff, self.head, self.tail,
                                  self.dp, self.lp, self.up, self.ch, self.ct, out)
        return out


# ---------------------------------------------------------------------------
# Schur system and its solvers


@dataclass(eq=False)
class SchurSystem:
    """Condensed vertex system ``S u_G = g`` of one quadrature step."""

    operator: StepOperator
    rhs: np.ndarray


def condense(op: StepOperator, W) -> SchurSystem:
    return SchurSystem(op, op.condense(W))


def schur_apply(s: SchurSystem, u_gamma) -> np.ndarray:
    return s.operator.schur_apply(u_gamma)


def neumann_precondition(s: SchurSystem, r_gamma) -> np.ndarray:
    return s.operator.precondition(r_gamma)


@dataclass(frozen=True)
class PCGResult:
    solution: np.ndarray
    iterations: int
    residual: float  # final relative residual


def pcg(s: SchurSystem, tol: float = 1e-10, max_iter: int | None = None) -> PCGResult:
    """Preconditioned CG on ``S u = g`` from a zero initial guess.

    Stops once ``||g - S u|| <= tol ||g||``.
    """
    op = s.operator
    g = s.rhs
    if max_iter is None:
        max_iter = op.num_vertices + 10
    gnorm = np.linalg.norm(g)
    x = np.zeros_like(g)
    if gnorm == 0.0:
        return PCGResult(x, 0, 0.0)

    # iterate on g / ||g||: tiny right-hand sides would otherwise underflow in r.z
    r = g / gnorm
    z = op.precondition(r)
    p = z.copy()
    rz = r @ z
    rel = 1.0
    for it in range(1, max_iter + 1):
        q = op.schur_apply(p)
        alpha = rz / (p @ q)
        x += alpha * p
        r -= alpha * q
        rel = np.linalg.norm(r)
        if rel <= tol:
            return PCGResult(x * gnorm, it, rel)
        z = op.precondition(r)
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise ConvergenceError(max_iter, rel)


def recover_interior(s: SchurSystem, u_gamma, W) -> np.ndarray:
    """Interior nodal values of all edges, flat in mesh ordering."""
    return s.operator.recover(u_gamma, W)


def split_interior(mesh: Mesh, u_interior) -> list[np.ndarray]:
    return [u_interior[mesh.interior_slice(e)] for e in range(mesh.num_edges)]


@dataclass(frozen=True)
class StepSolution:
    values: np.ndarray  # u^(l) in mesh ordering
    iterations: int


def solve_step(op: StepOperator, W, tol: float = 1e-10, max_iter: int | None = None) -> StepSolution:
    """Solve ``A^(l) u = W`` for one right-hand side."""
    W = np.ascontiguousarray(W, dtype=np.float64)
    s = condense(op, W)
    res = pcg(s, tol, max_iter)
    u_int = recover_interior(s, res.solution, W)
    return StepSolution(np.concatenate([u_int, res.solution]), res.iterations)
