import numpy as np
import pytest
from hypothesis import given, strategies as st

from metric_grf.assembly import MassMode, assemble_mass
from metric_grf.graph import MetricGraph, generate_barabasi_albert
from metric_grf.mesh import (
    MeshNestingError,
    build_mesh,
    edge_node_indices,
    element_nodes,
    node_position,
    node_table,
    prolongation,
    segment_count,
)

from conftest import nested_graph
from oracles import hat, layout


def one_edge(length=1.0):
    return MetricGraph.from_edges(2, [(0, 1, length)])


def test_segment_examples():
    m = build_mesh(one_edge(), 0.3)
    assert m.segments.tolist() == [4]
    assert m.edge_h[0] == pytest.approx(0.25)
    assert m.node_count.tolist() == [5]
    assert m.interior_count.tolist() == [3]

    m = build_mesh(one_edge(), 1.0)
    assert m.segments.tolist() == [1]
    assert m.edge_h[0] == 1.0
    assert m.interior_count.tolist() == [0]
    assert m.num_nodes == 2


def test_default_graph_count(default_graph):
    assert build_mesh(default_graph, 2.0**-2).num_nodes == 16


def test_segment_count_exact_ratios():
    # 0.3 / 0.1 is 2.9999999999999996 in floating point
    assert segment_count(0.3, 0.1) == 3
    assert segment_count(1.0, 2.0**-10) == 1024
    assert segment_count(1.0, 0.3) == 4
    assert segment_count(0.01, 5.0) == 1


def test_node_position_examples():
    m = build_mesh(one_edge(), 0.25)
    first = node_position(m, 0)
    assert (first.kind, first.id, first.x) == ("edge", 0, 0.25)
    last_interior = node_position(m, m.total_interior - 1)
    assert last_interior.x == pytest.approx(1.0 - 0.25)
    v = node_position(m, m.num_nodes - 1)
    assert (v.kind, v.id, v.x) == ("vertex", 1, None)
    with pytest.raises(IndexError):
        node_position(m, m.num_nodes)
    with pytest.raises(IndexError):
        node_position(m, -1)


graphs = st.lists(st.floats(0.05, 3.0), min_size=1, max_size=6).map(
    lambda ls: MetricGraph.from_edges(len(ls) + 1, [(i, i + 1, l) for i, l in enumerate(ls)])
)


@given(graphs, st.floats(0.01, 2.0))
def test_mesh_invariants(g, h):
    m = build_mesh(g, h)
    assert np.all(m.edge_h <= h * (1 + 1e-12))
    assert np.allclose(m.segments * m.edge_h, g.lengths, rtol=1e-14)
    assert np.isclose((m.segments * m.edge_h).sum(), g.total_length, rtol=1e-13)
    assert m.num_nodes == g.num_vertices + (m.segments - 1).sum()
    assert m.interior_offset.tolist() == np.concatenate([[0], np.cumsum(m.interior_count)[:-1]]).tolist()


@given(graphs, st.floats(0.02, 1.0))
def test_index_map_bijective(g, h):
    m = build_mesh(g, h)
    edge_id, vertex_id, x = node_table(m)
    seen = set()
    for i in range(m.num_nodes):
        pos = node_position(m, i)
        if pos.kind == "edge":
            s = m.interior_slice(pos.id)
            rank = i - s.start + 1
            assert pos.x == pytest.approx(rank * m.edge_h[pos.id])
            assert (edge_id[i], vertex_id[i]) == (pos.id, -1)
            assert x[i] == pytest.approx(pos.x)
            key = (pos.id, rank)
        else:
            assert m.vertex_index(pos.id) == i
            assert (edge_id[i], vertex_id[i]) == (-1, pos.id)
            key = ("v", pos.id)
        seen.add(key)
    assert len(seen) == m.num_nodes


def test_matches_oracle_layout(odd_graph):
    n_e, h_e, nodes, N = layout(odd_graph, 0.1)
    m = build_mesh(odd_graph, 0.1)
    assert m.segments.tolist() == n_e
    assert np.allclose(m.edge_h, h_e)
    assert m.num_nodes == N
    for e in range(m.num_edges):
        assert edge_node_indices(m, e).tolist() == nodes[e]


def test_element_nodes_cover_edges(odd_graph):
    m = build_mesh(odd_graph, 0.15)
    a, b, h, edge = element_nodes(m)
    assert len(a) == m.segments.sum()
    assert np.isclose(h.sum(), odd_graph.total_length)
    for e in range(m.num_edges):
        idx = edge_node_indices(m, e)
        sel = edge == e
        assert a[sel].tolist() == idx[:-1].tolist()
        assert b[sel].tolist() == idx[1:].tolist()


def test_prolongation_identity(default_graph):
    m = build_mesh(default_graph, 0.125)
    P = prolongation(m, m)
    assert np.array_equal(P.toarray(), np.eye(m.num_nodes))


def test_prolongation_midpoint():
    coarse, fine = build_mesh(one_edge(), 1.0), build_mesh(one_edge(), 0.5)
    P = prolongation(coarse, fine).toarray()
    # fine: [mid, v0, v1]; coarse: [v0, v1]
    assert P.tolist() == [[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]


def test_prolongation_quarter():
    coarse, fine = build_mesh(one_edge(), 0.5), build_mesh(one_edge(), 0.25)
    P = prolongation(coarse, fine).toarray()
    # fine interior x = 0.25, 0.5, 0.75; coarse [mid, v0, v1]
    assert P[0].tolist() == [0.5, 0.5, 0.0]
    assert P[1].tolist() == [1.0, 0.0, 0.0]
    assert P[2].tolist() == [0.5, 0.0, 0.5]


@pytest.mark.parametrize("ratio", [2, 3, 4])
def test_prolongation_matches_hat_oracle(ratio):
    odd_graph = nested_graph()
    coarse = build_mesh(odd_graph, 0.2)
    fine = build_mesh(odd_graph, 0.2 / ratio)
    P = prolongation(coarse, fine).toarray()
    expected = np.zeros_like(P)
    for e, length in enumerate(odd_graph.lengths):
        cx = np.linspace(0, length, coarse.segments[e] + 1)
        fx = np.linspace(0, length, fine.segments[e] + 1)
        cidx, fidx = edge_node_indices(coarse, e), edge_node_indices(fine, e)
        for fi, x in zip(fidx, fx):
            expected[fi, cidx] = hat(x, cx)
    assert np.allclose(P, expected, atol=1e-14)
    assert np.allclose(P.sum(axis=1), 1.0)
    assert np.array_equal(P[np.ix_(fine.total_interior + np.arange(5), coarse.total_interior + np.arange(5))], np.eye(5))


@given(st.integers(0, 3), st.integers(1, 3), st.integers(0, 500))
def test_lumped_mass_partition_of_unity(level, extra, seed):
    g = generate_barabasi_albert(12, 2, seed=seed)
    coarse = build_mesh(g, 2.0**-level)
    fine = build_mesh(g, 2.0 ** -(level + extra))
    P = prolongation(coarse, fine)
    wf = assemble_mass(fine, MassMode.LUMPED).diagonal
    wc = assemble_mass(coarse, MassMode.LUMPED).diagonal
    assert np.allclose(P.T @ wf, wc, rtol=1e-13)


def test_prolongation_rejects_non_nested(default_graph):
    with pytest.raises(MeshNestingError):
        prolongation(build_mesh(default_graph, 1 / 3), build_mesh(default_graph, 1 / 4))
    other = MetricGraph.from_edges(2, [(0, 1, 2.0)])
    with pytest.raises(MeshNestingError):
        prolongation(build_mesh(other, 0.5), build_mesh(one_edge(), 0.25))
