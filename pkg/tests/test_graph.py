import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metric_grf.graph import (
    GraphParseError,
    GraphValidationError,
    MetricGraph,
    degrees,
    format_graph,
    generate_barabasi_albert,
    load_graph,
    parse_graph,
    save_graph,
)


def test_load_default_graph_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("4 4\n0 1 1.0\n1 2 1.0\n2 0 1.0\n0 3 1.0")
    g = load_graph(p)
    assert (g.num_vertices, g.num_edges) == (4, 4)
    assert degrees(g).tolist() == [3, 2, 2, 1]


@pytest.mark.parametrize("text, match", [
    ("2 1\n0 0 1.0", "self-loop"),
    ("2 1\n0 1 -2.0", "non-positive"),
    ("2 1\n0 1 0.0", "non-positive"),
    ("2 1\n0 2 1.0", "out of range"),
    ("3 1\n0 1 1.0", "isolated"),
])
def test_validation_errors(text, match):
    with pytest.raises(GraphValidationError, match=match):
        parse_graph(text)


@pytest.mark.parametrize("text", ["", "4\n0 1 1.0", "2 1\n0 1", "2 1\n0 one 1.0", "2 2\n0 1 1.0"])
def test_parse_errors(text):
    with pytest.raises(GraphParseError):
        parse_graph(text)


def test_comments_and_blank_lines_ignored():
    g = parse_graph("# a path\n3 2\n\n0 1 0.5\n# middle\n1 2 2.5\n")
    assert g.lengths.tolist() == [0.5, 2.5]


def test_degrees_examples():
    assert degrees(MetricGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])).tolist() == [1, 2, 1]
    assert degrees(MetricGraph.from_edges(2, [(0, 1, 1.0), (0, 1, 2.0)])).tolist() == [2, 2]


def test_graph_is_immutable(default_graph):
    with pytest.raises(ValueError):
        default_graph.lengths[0] = 2.0


def test_ba_triangle():
    g = generate_barabasi_albert(3, 2, seed=123)
    assert g.num_edges == 3
    assert sorted(zip(g.heads.tolist(), g.tails.tolist())) == [(0, 1), (0, 2), (1, 2)]


def test_ba_100():
    g = generate_barabasi_albert(100, 2)
    assert (g.num_vertices, g.num_edges) == (100, 197)


@pytest.mark.parametrize("n, m", [(2, 2), (1, 2), (5, 0)])
def test_ba_invalid(n, m):
    with pytest.raises(ValueError):
        generate_barabasi_albert(n, m)


@given(st.integers(1, 6).flatmap(lambda m: st.tuples(st.just(m), st.integers(m + 1, 80))),
       st.integers(0, 2**32 - 1))
def test_ba_edge_count_and_structure(mn, seed):
    m, n = mn
    g = generate_barabasi_albert(n, m, seed=seed)
    assert g.num_edges == math.comb(m + 1, 2) + m * (n - m - 1)
    assert degrees(g).sum() == 2 * g.num_edges
    # no parallel edges: targets of each new vertex are distinct
    pairs = {tuple(sorted(p)) for p in zip(g.heads.tolist(), g.tails.tolist())}
    assert len(pairs) == g.num_edges
    # every vertex after the clique has exactly m edges to older vertices
    newer = np.maximum(g.heads, g.tails)
    assert np.all(np.bincount(newer, minlength=n)[m + 1:] == m)


@given(st.integers(0, 1000))
def test_ba_reproducible(seed):
    a = generate_barabasi_albert(60, 2, 0.5, seed)
    b = generate_barabasi_albert(60, 2, 0.5, seed)
    assert a.same_structure(b)
    assert np.all(a.lengths == 0.5)


def test_ba_seed_changes_graph():
    a = generate_barabasi_albert(200, 2, seed=1)
    b = generate_barabasi_albert(200, 2, seed=2)
    assert not a.same_structure(b)


def test_ba_preferential():
    # hubs: the initial clique accumulates far more than the average degree
    g = generate_barabasi_albert(3000, 2, seed=7)
    d = degrees(g)
    assert d[:3].mean() > 8 * d.mean()


edge_lists = st.integers(2, 8).flatmap(lambda nv: st.tuples(
    st.just(nv),
    st.lists(st.tuples(st.integers(0, nv - 1), st.integers(0, nv - 1),
                       st.floats(1e-6, 1e6, allow_nan=False)), min_size=1, max_size=20),
))


@given(edge_lists)
def test_round_trip(case):
    nv, edges = case
    edges = [(u, v, l) for u, v, l in edges if u != v]
    used = {u for u, _, _ in edges} | {v for _, v, _ in edges}
    if not edges or len(used) != nv:
        with pytest.raises(GraphValidationError):
            MetricGraph.from_edges(nv, edges)
        return
    g = MetricGraph.from_edges(nv, edges)
    assert parse_graph(format_graph(g)).same_structure(g)


def test_save_load(tmp_path, odd_graph):
    p = tmp_path / "odd.txt"
    save_graph(odd_graph, p)
    assert load_graph(p).same_structure(odd_graph)
