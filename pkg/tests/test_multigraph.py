from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apartments.multigraph import (
    NO_CYCLE,
    GraphError,
    Multigraph,
    NotBipartite,
    ParseError,
    bipartition,
    canonical_form,
    from_canonical_form,
    from_graph6,
    from_mgtext,
    girth,
    is_bipartite,
    is_isomorphic,
    iter_mgtext,
    to_graph6,
    to_mgtext,
)

K4 = Multigraph(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
K33 = Multigraph(6, [(a, b) for a in (1, 2, 3) for b in (4, 5, 6)])
THETA = Multigraph(2, [(1, 2)] * 3)


def test_construction_rejects_loops_and_range():
    with pytest.raises(GraphError, match="loop"):
        Multigraph(3, [(2, 2)])
    with pytest.raises(GraphError, match="out of range"):
        Multigraph(3, [(1, 4)])
    with pytest.raises(GraphError):
        Multigraph(0, [])


def test_parallel_edges_get_distinct_ids():
    g = Multigraph(2, [(2, 1), (1, 2)])
    assert g.edges == ((1, 2), (1, 2))
    assert g.multiplicity(2, 1) == 2
    assert [eid for _, eid in g.incidence(1)] == [0, 1]
    assert g.double_edges() == [(1, 2)]
    assert not g.is_simple()


def test_bipartition_and_odd_walk():
    a, b = bipartition(K33)
    assert a == {1, 2, 3} and b == {4, 5, 6}
    with pytest.raises(NotBipartite) as info:
        bipartition(K4)
    walk = info.value.walk
    assert walk[0] == walk[-1]
    assert (len(walk) - 1) % 2 == 1
    for u, v in zip(walk, walk[1:]):
        assert K4.multiplicity(u, v)
    assert is_bipartite(THETA)


def test_girth():
    assert girth(K4) == 3
    assert girth(K33) == 4
    assert girth(THETA) == 2
    assert girth(Multigraph(3, [(1, 2), (2, 3)])) == NO_CYCLE
    petersen = nx.petersen_graph()
    g = Multigraph(10, [(u + 1, v + 1) for u, v in petersen.edges()])
    assert girth(g) == 5


def _random_cubic(n: int, seed: int) -> Multigraph:
    h = nx.random_regular_graph(3, n, seed=seed)
    return Multigraph(n, [(u + 1, v + 1) for u, v in h.edges()])


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from([8, 10, 12, 16]))
def test_canonical_form_invariant_under_relabelling(seed, n):
    g = _random_cubic(n, seed)
    perm = list(range(1, n + 1))
    random.Random(seed).shuffle(perm)
    h = g.relabel({v: perm[v - 1] for v in g.vertices()})
    assert canonical_form(g) == canonical_form(h)
    assert is_isomorphic(from_canonical_form(canonical_form(g)), g)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_canonical_form_agrees_with_networkx(seed):
    g, h = _random_cubic(10, seed), _random_cubic(10, seed + 1)
    ng = nx.Graph([(u, v) for u, v in g.edges])
    nh = nx.Graph([(u, v) for u, v in h.edges])
    assert (canonical_form(g) == canonical_form(h)) == nx.is_isomorphic(ng, nh)


def test_canonical_form_separates_multiplicity():
    a = Multigraph(4, [(1, 2), (1, 2), (1, 3), (2, 4), (3, 4), (3, 4)])
    b = Multigraph(4, [(1, 2), (1, 3), (1, 3), (2, 4), (2, 4), (3, 4)])
    c = Multigraph(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
    assert canonical_form(a) == canonical_form(b)
    assert canonical_form(a) != canonical_form(c)


def test_graph6_known_strings():
    assert to_graph6(K4) == b"C~"
    empty16 = Multigraph(16, [])
    assert to_graph6(empty16) == b"O" + b"?" * 20
    assert from_graph6(b">>graph6<<C~\n") == K4


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_graph6_round_trip_and_networkx(seed):
    g = _random_cubic(16, seed)
    data = to_graph6(g)
    assert from_graph6(data) == g
    back = nx.from_graph6_bytes(data)
    assert sorted((u + 1, v + 1) for u, v in back.edges()) == list(g.edges)


def test_graph6_errors():
    with pytest.raises(GraphError):
        to_graph6(THETA)
    with pytest.raises(ParseError) as info:
        from_graph6(b"C~~")
    assert info.value.offset == 1
    with pytest.raises(ParseError) as info:
        from_graph6(b"C\x20")
    assert info.value.offset == 1


def test_mgtext_round_trip_and_parallel_edges():
    g = from_mgtext("mg 2 3\ne 1 2\ne 1 2\ne 2 1\n")
    assert g == THETA
    assert from_mgtext(to_mgtext(K33)) == K33
    assert list(iter_mgtext(b"")) == []
    two = list(iter_mgtext(to_mgtext(K4) + b"# comment\n" + to_mgtext(THETA)))
    assert two == [K4, THETA]


@pytest.mark.parametrize(
    "text, fragment, offset",
    [
        ("mg 3 1\ne 2 2\n", "loop at vertex 2", 7),
        ("mg 3 1\ne 1 5\n", "outside 1..3", 7),
        ("mg 3 2\ne 1 2\n", "declares 2 edges", 0),
        ("e 1 2\n", "before 'mg'", 0),
        ("mg 3 1\nx 1 2\n", "unknown record", 7),
        ("mg three 1\n", "malformed header", 0),
        ("# only a comment\n", "found 0", 0),
    ],
)
def test_mgtext_errors(text, fragment, offset):
    with pytest.raises(ParseError, match=fragment) as info:
        from_mgtext(text)
    assert info.value.offset == offset
