"""P1 finite element matrices on a metric-graph mesh.

Global matrices are assembled element by element and are used for noise
factorisation and as dense oracles. The domain-decomposition solver never
touches them: it works from the per-edge stencil coefficients stored
alongside, via :func:`operator_blocks`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh, element_nodes


class MassMode(str, Enum):
    CONSISTENT = "consistent"
    LUMPED = "lumped"


@dataclass(frozen=True, eq=False)
class EdgeStencil:
    """Per-edge matrix coefficients of a uniform P1 discretisation.

    ``interior`` is the diagonal entry at an interior node, ``coupling`` the
    entry between neighbouring nodes and ``vertex`` the contribution of one
    edge to the diagonal entry at either endpoint.
    """

    interior: np.ndarray
    coupling: np.ndarray
    vertex: np.ndarray


@dataclass(frozen=True, eq=False)
class MassMatrix:
    mesh: Mesh
    mode: MassMode
    matrix: sp.csr_matrix
    stencil: EdgeStencil

    @property
    def lumped(self) -> bool:
        return self.mode is MassMode.LUMPED

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, x):
        return self.matrix @ x


@dataclass(frozen=True, eq=False)
class StiffnessMatrix:
    mesh: Mesh
    matrix: sp.csr_matrix
    stencil: EdgeStencil

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, x):
        return self.matrix @ x


def _assemble(m: Mesh, diag_coef, off_coef) -> sp.csr_matrix:
    """Sum 2x2 element matrices [[d, o], [o, d]] (per-element arrays) into CSR."""
    a, b, _, _ = element_nodes(m)
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([diag_coef, diag_coef, off_coef, off_coef])
    keep = vals != 0.0
    A = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(m.num_nodes,) * 2)
    return A.tocsr()


def assemble_mass(m: Mesh, mode: MassMode | str = MassMode.CONSISTENT) -> MassMatrix:
    mode = MassMode(mode)
    _, _, h, _ = element_nodes(m)
    he = m.edge_h
    if mode is MassMode.CONSISTENT:
        matrix = _assemble(m, h / 3.0, h / 6.0)
        stencil = EdgeStencil(2.0 * he / 3.0, he / 6.0, he / 3.0)
    else:
        matrix = _assemble(m, h / 2.0, np.zeros_like(h))
        stencil = EdgeStencil(he.copy(), np.zeros_like(he), he / 2.0)
    return MassMatrix(m, mode, matrix, stencil)


def assemble_stiffness(m: Mesh) -> StiffnessMatrix:
    _, _, h, _ = element_nodes(m)
    he = m.edge_h
    matrix = _assemble(m, 1.0 / h, -1.0 / h)
    return StiffnessMatrix(m, matrix, EdgeStencil(2.0 / he, -1.0 / he, 1.0 / he))


def system_matrix(M_w: MassMatrix, G: StiffnessMatrix, kappa: float, c_I: float, c_L: float):
    """Global ``(c_I + kappa^2 c_L) M_w + c_L G`` as a sparse matrix (oracle path)."""
    return ((c_I + kappa**2 * c_L) * M_w.matrix + c_L * G.matrix).tocsr()


@dataclass(frozen=True, eq=False)
class OperatorBlocks:
    """Tridiagonal edge blocks of ``A = (c_I + kappa^2 c_L) M_w + c_L G`` for all edges.

    Interior arrays are flat in global interior ordering. ``off[i]`` couples
    interior nodes ``i`` and ``i + 1`` of the same edge and is zero at the last
    interior node of each edge. ``coupling_head[e]`` couples the head vertex to
    the first interior node (to the tail vertex when the edge has no interior);
    ``vertex_head[e]`` is edge ``e``'s share of the head vertex diagonal.
    """

    mesh: Mesh
    diag: np.ndarray
    off: np.ndarray
    coupling_head: np.ndarray
    coupling_tail: np.ndarray
    vertex_head: np.ndarray
    vertex_tail: np.ndarray


@dataclass(frozen=True)
class EdgeOperatorBlocks:
    """Blocks of the local operator of one edge."""

    diag: np.ndarray  # A_II diagonal, length n_e - 1
    lower: np.ndarray  # A_II sub-diagonal, length n_e - 2
    upper: np.ndarray  # A_II super-diagonal
    coupling: tuple[float, float]  # (A_GI)_{1,1}, (A_GI)_{2,n_e-1}; vertex-vertex entry if n_e = 1
    vertex_diag: tuple[float, float]  # this edge's share of A_GG at head and tail

    @property
    def size(self) -> int:
        return len(self.diag)

    def local_matrix(self) -> np.ndarray:
        """Dense A^(e) ordered [head, interior..., tail]."""
        n = self.size
        A = np.zeros((n + 2, n + 2))
        A[0, 0], A[-1, -1] = self.vertex_diag
        idx = np.arange(1, n + 1)
        A[idx, idx] = self.diag
        A[idx[:-1], idx[1:]] = self.upper
        A[idx[1:], idx[:-1]] = self.lower
        if n == 0:
            A[0, 1] = A[1, 0] = self.coupling[0]
        else:
            A[0, 1] = A[1, 0] = self.coupling[0]
            A[n, n + 1] = A[n + 1, n] = self.coupling[1]
        return A


def operator_blocks(
    m: Mesh, M_w: MassMatrix, G: StiffnessMatrix, kappa: float, c_I: float, c_L: float
) -> OperatorBlocks:
    a = c_I + kappa**2 * c_L
    ms, gs = M_w.stencil, G.stencil
    interior = a * ms.interior + c_L * gs.interior
    coupling = a * ms.coupling + c_L * gs.coupling
    vertex = a * ms.vertex + c_L * gs.vertex

    counts = m.interior_count
    edge_of = np.repeat(np.arange(m.num_edges), counts)
    diag = interior[edge_of]
    off = coupling[edge_of]
    ends = m.interior_offset + counts - 1
    off[ends[counts > 0]] = 0.0
    return OperatorBlocks(
        mesh=m,
        diag=diag,
        off=off,
        coupling_head=coupling.copy(),
        coupling_tail=coupling.copy(),
        vertex_head=vertex.copy(),
        vertex_tail=vertex,
    )


def edge_blocks(
    m: Mesh, M_w: MassMatrix, G: StiffnessMatrix, kappa: float, c_I: float, c_L: float, e: int
) -> EdgeOperatorBlocks:
    return extract_edge(operator_blocks(m, M_w, G, kappa, c_I, c_L), e)


def extract_edge(blocks: OperatorBlocks, e: int) -> EdgeOperatorBlocks:
    s = blocks.mesh.interior_slice(e)
    diag = blocks.diag[s].copy()
    off = blocks.off[s][:-1].copy()
    return EdgeOperatorBlocks(
        diag=diag,
        lower=off,
        upper=off.copy(),
        coupling=(float(blocks.coupling_head[e]), float(blocks.coupling_tail[e])),
        vertex_diag=(float(blocks.vertex_head[e]), float(blocks.vertex_tail[e])),
    )


def assemble_from_blocks(blocks: OperatorBlocks) -> sp.csr_matrix:
    """Scatter every edge block into a global sparse matrix."""
    m = blocks.mesh
    rows, cols, vals = [], [], []
    T = np.arange(m.total_interior)
    rows += [T]
    cols += [T]
    vals += [blocks.diag]
    inner = np.flatnonzero(blocks.off)
    rows += [inner, inner + 1]
    cols += [inner + 1, inner]
    vals += [blocks.off[inner]] * 2

    head, tail = m.head_index, m.tail_index
    rows += [head, tail]
    cols += [head, tail]
    vals += [blocks.vertex_head, blocks.vertex_tail]

    has = m.interior_count > 0
    first = m.interior_offset[has]
    last = first + m.interior_count[has] - 1
    rows += [head[has], first, tail[has], last]
    cols += [first, head[has], last, tail[has]]
    vals += [blocks.coupling_head[has]] * 2 + [blocks.coupling_tail[has]] * 2

    bare = ~has
    rows += [head[bare], tail[bare]]
    cols += [tail[bare], head[bare]]
    vals += [blocks.coupling_head[bare]] * 2

    rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    return sp.coo_matrix((vals, (rows, cols)), shape=(m.num_nodes,) * 2).tocsr()
