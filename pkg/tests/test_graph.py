import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssact.graph import (
    GraphError,
    adjacency_matrix,
    enumerate_paths,
    is_irreducible,
    is_strongly_connected,
    validate_graph,
)


def loops2():
    return validate_graph({"vertices": ["v"], "edges": [
        {"name": "0", "range": "v", "source": "v"},
        {"name": "1", "range": "v", "source": "v"},
    ]})


def cycle2():
    return validate_graph({"vertices": ["v", "w"], "edges": [
        {"name": "e1", "range": "v", "source": "w"},
        {"name": "e2", "range": "w", "source": "v"},
    ]})


def test_two_loop_graph_is_valid():
    g = loops2()
    assert g.num_vertices == 1 and g.num_edges == 2


def test_dangling_endpoint():
    with pytest.raises(GraphError) as info:
        validate_graph({"vertices": ["v"], "edges": [{"name": "e", "range": "v", "source": "x"}]})
    assert any("dangling endpoint" in e for e in info.value.errors)


def test_duplicate_label_and_empty_vertices_reported_together():
    with pytest.raises(GraphError) as info:
        validate_graph({"vertices": [], "edges": [
            {"name": "e", "range": "v", "source": "v"},
            {"name": "e", "range": "v", "source": "v"},
        ]})
    text = " ".join(info.value.errors)
    assert "empty vertex set" in text and "duplicate label" in text


def test_cycle_is_strongly_connected():
    assert is_strongly_connected(cycle2())


def test_enumerate_free_monoid():
    assert [str(p) for p in enumerate_paths(loops2(), "v", 2)] == ["00", "01", "10", "11"]


def test_enumerate_cycle_from_v():
    paths = enumerate_paths(cycle2(), "v", 2)
    assert [p.edges for p in paths] == [("e1", "e2")]


def test_enumerate_length_zero():
    (p,) = enumerate_paths(loops2(), "v", 0)
    assert len(p) == 0 and p.range == p.source == "v"


def test_enumeration_guard():
    g = validate_graph({"vertices": ["v"], "edges": [{"name": "0", "range": "v", "source": "v"}]}, max_depth=3)
    with pytest.raises(ValueError):
        enumerate_paths(g, "v", 4)


def test_adjacency_examples():
    assert adjacency_matrix(loops2()).tolist() == [[2]]
    assert adjacency_matrix(cycle2()).tolist() == [[0, 1], [1, 0]]
    full = validate_graph({"vertices": ["v", "w"], "edges": [
        {"name": "a", "range": "v", "source": "v"},
        {"name": "b", "range": "v", "source": "w"},
        {"name": "c", "range": "w", "source": "v"},
        {"name": "d", "range": "w", "source": "w"},
    ]})
    assert adjacency_matrix(full).tolist() == [[1, 1], [1, 1]]


def test_strong_connectivity_examples():
    single = validate_graph({"vertices": ["v"], "edges": [{"name": "l", "range": "v", "source": "v"}]})
    assert is_strongly_connected(single)
    one_way = validate_graph({"vertices": ["v", "w"], "edges": [{"name": "e", "range": "w", "source": "v"}]})
    assert not is_strongly_connected(one_way)
    assert not is_irreducible(np.array([[0]]))


def test_path_parse_and_concat():
    g = cycle2()
    mu = g.parse_path("e1")
    nu = g.parse_path("e2")
    assert g.concat(mu, nu).edges == ("e1", "e2")
    with pytest.raises(ValueError):
        g.concat(mu, mu)


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 4))
    verts = [f"v{i}" for i in range(n)]
    m = draw(st.integers(0, 6))
    edges = [
        {"name": f"e{j}", "range": verts[draw(st.integers(0, n - 1))], "source": verts[draw(st.integers(0, n - 1))]}
        for j in range(m)
    ]
    return validate_graph({"vertices": verts, "edges": edges})


@settings(max_examples=60, deadline=None)
@given(random_graphs(), st.integers(0, 8))
def test_path_counts_match_adjacency_powers(g, k):
    A = adjacency_matrix(g).astype(object)
    Ak = np.linalg.matrix_power(A, k) if k else np.eye(len(A), dtype=int).astype(object)
    for i, v in enumerate(g.vertices):
        assert len(enumerate_paths(g, v, k)) == sum(Ak[i])


@settings(max_examples=40, deadline=None)
@given(random_graphs(), st.integers(0, 5))
def test_concatenation_is_a_bijection(g, k):
    longer = {p.edges for p in enumerate_paths(g, None, k + 1)}
    pairs = [
        (e, nu) for e in g.edge_names
        for nu in enumerate_paths(g, g.s(e), k)
    ]
    joined = {(e,) + nu.edges for e, nu in pairs}
    assert len(joined) == len(pairs)
    assert joined == longer
