import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raidnc.channel import ErasureModel
from raidnc.clique import is_clique, is_maximal_clique
from raidnc.graph import (
    Vertex,
    achievable_rates,
    build_graph,
    build_layer_graph,
    candidate_rates,
    common_neighbors,
    read_graph_text,
    vertex_weight,
)
from raidnc.model import SideInfo

from conftest import FIXTURE_CAPS, fixture_state


def reference_edges(side_info, caps):
    """Pairwise adjacency written straight from the vertex and edge rules."""
    F = side_info.num_messages
    rates = sorted(set(caps), reverse=True)
    verts = [
        (u, f, r)
        for u in range(side_info.num_users)
        for f in sorted(side_info.wants[u])
        for r in rates
        if r <= caps[u]
    ]
    full = set(range(1, F + 1))
    has = [full - side_info.wants[u] for u in range(side_info.num_users)]
    edges = set()
    for a in verts:
        for b in verts:
            if a >= b or a[0] == b[0] or a[2] != b[2]:
                continue
            if a[1] == b[1] or (a[1] in has[b[0]] and b[1] in has[a[0]]):
                edges.add(frozenset((a, b)))
    return verts, edges


def as_triples(graph):
    verts = [(v.user, v.message, v.rate) for v in graph.vertices]
    edges = {frozenset((verts[i], verts[j])) for i, j in graph.edges()}
    return verts, edges


def test_candidate_rates():
    assert candidate_rates([4, 2, 2]) == [4.0, 2.0]
    assert achievable_rates([4, 2, 2], 0) == [4.0, 2.0]
    assert achievable_rates([4, 2, 2], 1) == [2.0]
    assert candidate_rates([3, 3, 3]) == [3.0]
    assert achievable_rates([5, 3, 1], 2) == [1.0]
    with pytest.raises(ValueError):
        candidate_rates([])


def test_fixture_vertices_and_clique():
    g = build_graph(fixture_state().side_info, FIXTURE_CAPS)
    assert [(v.user, v.message, v.rate) for v in g.vertices] == [
        (0, 1, 4.0),
        (0, 1, 2.0),
        (1, 2, 2.0),
        (1, 3, 2.0),
        (2, 1, 2.0),
        (2, 2, 2.0),
    ]
    verts, edges = reference_edges(fixture_state().side_info, FIXTURE_CAPS)
    assert as_triples(g) == (verts, edges)
    triple = [1, 3, 4]
    assert is_clique(g, triple)
    assert is_maximal_clique(g, triple)
    combo, rate, users = g.transmission_of(triple)
    assert (combo, rate, users) == ({1, 3}, 2.0, {0, 1, 2})


def test_single_user_graph():
    g = build_graph(SideInfo(1, [{1}]), [5.0])
    assert g.n == 1 and g.edges() == []


def test_shared_message_single_edge():
    g = build_graph(SideInfo(1, [{1}, {1}]), [2.0, 2.0])
    assert g.edges() == [(0, 1)]


def test_restricted_users_and_empty_graph():
    si = fixture_state().side_info
    g = build_graph(si, FIXTURE_CAPS, users=[0])
    assert {v.user for v in g.vertices} == {0}
    assert build_graph(SideInfo(2, [set(), set()]), [1.0, 1.0]).n == 0
    with pytest.raises(ValueError):
        build_graph(si, [1.0, 2.0])


@st.composite
def instances(draw):
    U = draw(st.integers(1, 5))
    F = draw(st.integers(1, 5))
    wants = [draw(st.sets(st.integers(1, F))) for _ in range(U)]
    caps = [float(draw(st.integers(1, 4))) for _ in range(U)]
    return SideInfo(F, wants), caps


@settings(max_examples=300, deadline=None)
@given(instances())
def test_graph_matches_reference(inst):
    si, caps = inst
    g = build_graph(si, caps)
    assert as_triples(g) == reference_edges(si, caps)
    for i in range(g.n):
        assert sorted(g.neighbors(i)) == sorted(j for j in range(g.n) if g.adjacent(i, j))
        assert not g.adjacent(i, i)


@settings(max_examples=100, deadline=None)
@given(instances())
def test_text_roundtrip(inst):
    si, caps = inst
    g = build_graph(si, caps, lambda u, f, r: u + f / 10 + r / 100)
    verts, weights, edges = read_graph_text(g.to_text())
    assert verts == g.vertices
    assert weights == g.weights
    assert edges == g.edges()


def test_rate_groups_relabel_consistently(worked):
    state, caps = worked
    g = build_graph(state.side_info, caps, lambda u, f, r: r)
    groups = g.rate_groups()
    assert [r for r, _ in groups] == [4.0, 2.0]
    for rate, sub in groups:
        for p in sub.vertex_ids():
            vid = sub.label(p)
            assert g.vertices[vid].rate == rate
            assert sub.weights[p] == g.weights[vid]
            for q in sub.vertex_ids():
                assert sub.adjacent(p, q) == g.adjacent(vid, sub.label(q))


def test_vertex_weight_rules():
    v = Vertex(0, 1, 2.0)
    decisive = {2.0: frozenset({0})}
    assert vertex_weight(v, decisive, ErasureModel("perfect"), 1.0) == pytest.approx(math.log(2))
    assert vertex_weight(v, {2.0: frozenset()}, ErasureModel("perfect"), 1.0) == 0.0
    assert vertex_weight(v, decisive, ErasureModel("offset", 0.1), 1.0) == pytest.approx(math.log(20))
    # negative when the rate is below the message size
    assert vertex_weight(v, decisive, ErasureModel("perfect"), 8.0) == pytest.approx(math.log(0.25))
    with pytest.raises(ValueError):
        vertex_weight(v, decisive, ErasureModel("perfect"), 0.0)


def test_layer_graph_on_fixture(worked):
    state, caps = worked
    g = build_graph(state.side_info, caps)
    # only user 0 chosen at rate 4: nothing else lives at that rate
    sub = build_layer_graph(g, [0], [1, 2])
    assert sub.vertex_ids() == []
    assert common_neighbors(g, [0]) == []
    # the full triple leaves nothing to add
    assert build_layer_graph(g, [1, 3, 4], [0, 1, 2]).vertex_ids() == []
    # starting from user 0 at rate 2, layer users 1 and 2 can join
    sub = build_layer_graph(g, [1], [1, 2], weight=0.5)
    labels = sorted(sub.label(p) for p in sub.vertex_ids())
    assert labels == sorted(common_neighbors(g, [1])) == [2, 3, 4]
    assert all(sub.weights[p] == 0.5 for p in sub.vertex_ids())
    # an empty layer gives an empty graph
    assert build_layer_graph(g, [1], []).vertex_ids() == []


def test_layer_graph_rejects_non_clique(worked):
    state, caps = worked
    g = build_graph(state.side_info, caps)
    with pytest.raises(ValueError):
        build_layer_graph(g, [0, 1], [2])
    with pytest.raises(ValueError):
        build_layer_graph(g, [], [2])
