"""Uniform per-edge meshes with interior-first global numbering.

Global node ordering: the interior nodes of edge 0 (by increasing local
coordinate), then those of edge 1, ..., and finally the topological vertices,
so vertex ``v`` has global index ``total_interior + v``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .graph import MetricGraph


def segment_count(length: float, h: float) -> int:
    """``ceil(length / h)``, robust to ratios that are integers up to rounding."""
    ratio = length / h
    nearest = round(ratio)
    if nearest >= 1 and math.isclose(ratio, nearest, rel_tol=1e-12):
        return int(nearest)
    return max(1, math.ceil(ratio))


@dataclass(frozen=True, eq=False)
class Mesh:
    graph: MetricGraph
    h_target: float
    segments: np.ndarray  # n_e
    edge_h: np.ndarray  # h_e = l_e / n_e
    interior_offset: np.ndarray  # global index of first interior node of each edge
    total_interior: int
    num_nodes: int

    @property
    def interior_count(self) -> np.ndarray:
        return self.segments - 1

    @property
    def node_count(self) -> np.ndarray:
        """N_e = n_e + 1, endpoints included."""
        return self.segments + 1

    @property
    def num_vertices(self) -> int:
        return self.graph.num_vertices

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges

    @property
    def head_index(self) -> np.ndarray:
        """Global index of each edge's left vertex."""
        return self.total_interior + self.graph.heads

    @property
    def tail_index(self) -> np.ndarray:
        return self.total_interior + self.graph.tails

    def interior_slice(self, e: int) -> slice:
        start = int(self.interior_offset[e])
        return slice(start, start + int(self.segments[e]) - 1)

    def vertex_index(self, v: int) -> int:
        return self.total_interior + v

    def __repr__(self):
        return (
            f"Mesh(|V|={self.num_vertices}, |E|={self.num_edges}, "
            f"h={self.h_target:g}, N={self.num_nodes})"
        )


def build_mesh(g: MetricGraph, h: float) -> Mesh:
    if not h > 0:
        raise ValueError(f"mesh size must be positive, got {h}")
    segments = np.array([segment_count(length, h) for length in g.lengths], dtype=np.int64)
    edge_h = g.lengths / segments
    interior = segments - 1
    offset = np.concatenate([[0], np.cumsum(interior)[:-1]]).astype(np.int64)
    total_interior = int(interior.sum())
    for arr in (segments, edge_h, offset):
        arr.setflags(write=False)
    return Mesh(
        graph=g,
        h_target=float(h),
        segments=segments,
        edge_h=edge_h,
        interior_offset=offset,
        total_interior=total_interior,
        num_nodes=total_interior + g.num_vertices,
    )


class NodePosition(NamedTuple):
    kind: str  # "edge" or "vertex"
    id: int
    x: float | None  # local coordinate on the edge; None for vertices


def node_position(m: Mesh, index: int) -> NodePosition:
    if not 0 <= index < m.num_nodes:
        raise IndexError(f"node index {index} outside 0..{m.num_nodes - 1}")
    if index >= m.total_interior:
        return NodePosition("vertex", index - m.total_interior, None)
    ends = m.interior_offset + m.interior_count
    e = int(np.searchsorted(ends, index, side="right"))
    rank = index - int(m.interior_offset[e]) + 1
    return NodePosition("edge", e, rank * float(m.edge_h[e]))


def node_table(m: Mesh):
    """Vectorised node_position for every node.

    Returns ``(edge_id, vertex_id, x)`` arrays of length N; ``edge_id`` is -1
    for topological vertices, ``vertex_id`` is -1 for interior nodes and
    ``x`` is 0 at vertices.
    """
    edge_id = np.repeat(np.arange(m.num_edges), m.interior_count)
    rank = np.arange(m.total_interior) - np.repeat(m.interior_offset, m.interior_count) + 1
    x = rank * m.edge_h[edge_id]
    nv = m.num_vertices
    return (
        np.concatenate([edge_id, np.full(nv, -1)]),
        np.concatenate([np.full(m.total_interior, -1), np.arange(nv)]),
        np.concatenate([x, np.zeros(nv)]),
    )


def edge_node_indices(m: Mesh, e: int) -> np.ndarray:
    """Global indices of all N_e nodes of edge ``e``, ordered along the edge."""
    s = m.interior_slice(e)
    return np.concatenate(
        [[m.head_index[e]], np.arange(s.start, s.stop), [m.tail_index[e]]]
    ).astype(np.int64)


def element_nodes(m: Mesh):
    """Endpoints and size of every mesh element.

    Returns ``(a, b, h, edge)`` where element ``k`` joins global nodes
    ``a[k]`` and ``b[k]``, has length ``h[k]`` and lies on edge ``edge[k]``.
    """
    seg = m.segments
    edge = np.repeat(np.arange(m.num_edges), seg)
    local = np.arange(int(seg.sum())) - np.repeat(np.cumsum(seg) - seg, seg)

    def glob(j):
        n = seg[edge]
        out = m.interior_offset[edge] + j - 1
        out = np.where(j == 0, m.head_index[edge], out)
        return np.where(j == n, m.tail_index[edge], out)

    return glob(local), glob(local + 1), m.edge_h[edge], edge


class MeshNestingError(ValueError):
    pass


def prolongation(coarse: Mesh, fine: Mesh) -> sp.csr_matrix:
    """Linear interpolation from coarse nodal values to fine nodes (N_fine x N_coarse)."""
    if coarse.graph is not fine.graph and not coarse.graph.same_structure(fine.graph):
        raise MeshNestingError("meshes live on different graphs")
    ratio = fine.segments // coarse.segments
    if np.any(ratio * coarse.segments != fine.segments):
        raise MeshNestingError("fine segment counts must be multiples of coarse ones")

    rows, cols, vals = [], [], []
    nv = fine.num_vertices
    rows.append(fine.total_interior + np.arange(nv))
    cols.append(coarse.total_interior + np.arange(nv))
    vals.append(np.ones(nv))

    for e in range(fine.num_edges):
        q = int(ratio[e])
        n_fine = int(fine.segments[e])
        j = np.arange(1, n_fine)
        seg, rem = np.divmod(j, q)
        t = rem / q
        coarse_nodes = edge_node_indices(coarse, e)
        fine_rows = fine.interior_offset[e] + j - 1
        rows += [fine_rows, fine_rows]
        cols += [coarse_nodes[seg], coarse_nodes[np.minimum(seg + 1, len(coarse_nodes) - 1)]]
        vals += [1.0 - t, t]

    rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    keep = vals != 0.0
    P = sp.coo_matrix(
        (vals[keep], (rows[keep], cols[keep])), shape=(fine.num_nodes, coarse.num_nodes)
    )
    return P.tocsr()
