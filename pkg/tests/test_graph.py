import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffsub.graph import (
    Graph,
    bipartize,
    complete_bipartite,
    complete_graph,
    contains_pattern,
    cycle_graph,
    find_pattern,
    format_edge_list,
    girth,
    hypercube,
    is_bipartite,
    make_graph,
    parse_edge_list,
    path_graph,
    random_regular,
)
from ffsub.templates import polarity_graph

from oracles import best_cut, contains_brute, girth_brute


@st.composite
def small_graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return make_graph(n, chosen)


# -- make_graph ---------------------------------------------------------------


def test_triangle_degrees():
    G = make_graph(3, [(0, 1), (1, 2), (0, 2)])
    assert G.degrees == (2, 2, 2)
    assert G.m == 3


def test_duplicate_edge_collapses():
    G = make_graph(2, [(0, 1), (1, 0)])
    assert G.m == 1
    assert list(G.edges()) == [(0, 1)]


def test_loop_rejected():
    with pytest.raises(ValueError):
        make_graph(2, [(0, 0)])


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        make_graph(2, [(0, 2)])


@given(small_graphs())
def test_edges_sorted_and_symmetric(G):
    edges = list(G.edges())
    assert edges == sorted(edges)
    assert all(u < v for u, v in edges)
    for u, v in edges:
        assert G.has_edge(v, u)
    assert sum(G.degrees) == 2 * G.m


@given(small_graphs())
def test_edge_list_round_trip(G):
    text = format_edge_list(G, "meta")
    H, comments = parse_edge_list(text)
    assert H == G
    assert comments == ["meta"]
    assert format_edge_list(H, "meta") == text


def test_edge_list_header_mismatch():
    with pytest.raises(ValueError):
        parse_edge_list("3 2\n0 1\n")


# -- random_regular -----------------------------------------------------------


def test_random_regular_k4():
    assert random_regular(4, 3, seed=5) == complete_graph(4)


def test_random_regular_two_regular_is_cycle_union():
    G = random_regular(6, 2, seed=1)
    assert G.is_regular() and G.max_degree == 2
    # a 2-regular graph is a disjoint union of cycles: every component has |E| = |V|
    seen = set()
    for s in range(G.n):
        if s in seen:
            continue
        comp, stack = {s}, [s]
        while stack:
            for y in G.adj[stack.pop()]:
                if y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        assert sum(G.degree(v) for v in comp) // 2 == len(comp)


def test_random_regular_parity_error():
    with pytest.raises(ValueError):
        random_regular(5, 3, seed=0)


def test_random_regular_needs_n_above_d():
    with pytest.raises(ValueError):
        random_regular(4, 4, seed=0)


@pytest.mark.parametrize("n,d", [(10, 3), (50, 4), (80, 8), (160, 16)])
def test_random_regular_is_simple_regular(n, d):
    for seed in range(3):
        G = random_regular(n, d, seed)
        assert G.n == n and G.is_regular() and G.max_degree == d


def test_random_regular_deterministic():
    assert random_regular(100, 6, seed=11) == random_regular(100, 6, seed=11)
    assert random_regular(100, 6, seed=11) != random_regular(100, 6, seed=12)


# -- bipartize ----------------------------------------------------------------


def _cross(sides, G, v):
    return sum(1 for w in G.adj[v] if sides.side_of[w] != sides.side_of[v])


def test_bipartize_c4_keeps_everything():
    sides, H = bipartize(cycle_graph(4))
    assert H == cycle_graph(4)
    assert sides.side_of[0] == sides.side_of[2] != sides.side_of[1] == sides.side_of[3]


def test_bipartize_k4_is_max_cut():
    G = complete_graph(4)
    sides, H = bipartize(G)
    assert len(sides.A) == len(sides.B) == 2
    assert H.m == best_cut(G) == 4
    assert H.degrees == (2, 2, 2, 2)


def test_bipartize_c5_is_max_cut():
    G = cycle_graph(5)
    sides, H = bipartize(G)
    assert H.m == best_cut(G) == 4
    assert H.min_degree >= 1


@settings(max_examples=200)
@given(small_graphs(max_n=12))
def test_bipartize_contract(G):
    sides, H = bipartize(G)
    assert is_bipartite(H)
    assert set(H.edges()) <= set(G.edges())
    for v in range(G.n):
        assert _cross(sides, G, v) >= math.ceil(G.degree(v) / 2)
        assert H.degree(v) == _cross(sides, G, v)


# -- girth and patterns -------------------------------------------------------


def test_girth_examples():
    assert girth(complete_graph(4)) == 3
    assert girth(cycle_graph(6)) == 6
    assert girth(path_graph(7)) == math.inf
    tree = make_graph(6, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)])
    assert girth(tree) == math.inf


@settings(max_examples=150)
@given(small_graphs(max_n=10))
def test_girth_matches_brute(G):
    assert girth(G) == girth_brute(G)


def test_contains_pattern_examples():
    assert contains_pattern(complete_bipartite(2, 3), cycle_graph(4))
    assert contains_pattern(cycle_graph(4), complete_bipartite(2, 2))
    assert not contains_pattern(polarity_graph(3), cycle_graph(4))


PATTERNS = [
    cycle_graph(3),
    cycle_graph(4),
    cycle_graph(5),
    complete_bipartite(2, 3),
    complete_bipartite(1, 3),
    path_graph(4),
    complete_graph(4),
    hypercube(2),
]


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_n=7), st.sampled_from(PATTERNS))
def test_contains_pattern_matches_brute(G, F):
    assert contains_pattern(G, F) == contains_brute(G, F)


@pytest.mark.parametrize("F", PATTERNS, ids=lambda F: f"n{F.n}m{F.m}")
def test_find_pattern_returns_embedding(F):
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randint(5, 9)
        G = make_graph(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.5])
        phi = find_pattern(G, F)
        assert (phi is not None) == contains_brute(G, F)
        if phi is not None:
            assert len(set(phi.values())) == F.n
            assert all(G.has_edge(phi[u], phi[v]) for u, v in F.edges())


def test_hypercube_shape():
    Q3 = hypercube(3)
    assert Q3.n == 8 and Q3.m == 12 and Q3.is_regular() and girth(Q3) == 4
    assert isinstance(Q3, Graph)
