import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffsub.graph import (
    complete_bipartite,
    complete_graph,
    contains_pattern,
    cycle_graph,
    format_edge_list,
    hypercube,
    make_graph,
    path_graph,
    write_edge_list,
)
from ffsub.homomorphism import (
    bad_count,
    closedness_witness_search,
    count_locally_injective_homs,
    is_hom_free,
    parse_family,
)
from ffsub.templates import polarity_graph

from oracles import bad_count_brute, hom_star_brute


# -- parse_family -------------------------------------------------------------


@pytest.mark.parametrize(
    "spec,sizes,closed,hint",
    [
        ("C4", [(4, 4)], True, "complete-bipartite"),
        ("C3-C5", [(3, 3), (4, 4), (5, 5)], True, "cycle-list"),
        ("C3-5", [(3, 3), (4, 4), (5, 5)], True, "cycle-list"),
        ("C6", [(6, 6)], False, "cycle-list"),
        ("C3+C6", [(3, 3), (6, 6)], True, "cycle-list"),
        ("C4+C5", [(4, 4), (5, 5)], False, "cycle-list"),
        ("K2,3", [(5, 6)], True, "complete-bipartite"),
        ("K3,2 K2,2", [(4, 4), (5, 6)], True, "complete-bipartite"),
        ("Q3", [(8, 12)], False, "hypercube3"),
        ("Q4", [(16, 32)], False, "generic"),
    ],
)
def test_parse_family(spec, sizes, closed, hint):
    fam = parse_family(spec)
    assert [(F.n, F.m) for F in fam.patterns] == sizes
    assert fam.closed is closed
    assert fam.detection_hint == hint


@pytest.mark.parametrize("spec", ["", "C2", "C5-C3", "K0,3", "Q0", "banana"])
def test_parse_family_rejects(spec):
    with pytest.raises(ValueError):
        parse_family(spec)


def test_parse_family_reads_file(tmp_path):
    path = tmp_path / "k4.txt"
    write_edge_list(complete_graph(4), path)
    fam = parse_family(str(path))
    assert fam.patterns == (complete_graph(4),)
    assert fam.closed is False


def test_family_properties():
    assert parse_family("C4").is_bipartite_family
    assert parse_family("C3-C5").is_bipartite_family
    assert not parse_family("C3").is_bipartite_family
    assert parse_family("C3-C7").cycle_girth_bound() == 8
    assert parse_family("C4+C5").cycle_girth_bound() is None


# -- bad_count ----------------------------------------------------------------


def test_bad_count_path():
    G = path_graph(3)
    assert bad_count(0, [1, None, 1], G) == 1


def test_bad_count_all_distinct():
    G = complete_graph(5)
    chi = [0, 1, 2, 3, 4]
    assert all(bad_count(v, chi, G) == 0 for v in range(5))


def test_bad_count_star_with_leaf_conflict():
    # centre 0 coloured 1 with leaves 1, 2; leaf 1 also touches 3, coloured 1
    G = make_graph(4, [(0, 1), (0, 2), (1, 3)])
    assert bad_count(0, [1, 5, 6, 1], G) == 1
    assert bad_count(3, [1, 5, 6, 1], G) == 1


def test_bad_count_uncoloured_raises():
    with pytest.raises(ValueError):
        bad_count(0, [None, 1], make_graph(2, [(0, 1)]))


@st.composite
def coloured_graphs(draw):
    n = draw(st.integers(1, 12))
    pairs = list(itertools.combinations(range(n), 2))
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    k = draw(st.integers(1, 4))
    chi = draw(st.lists(st.one_of(st.none(), st.integers(0, k - 1)), min_size=n, max_size=n))
    return make_graph(n, edges), chi


@settings(max_examples=300)
@given(coloured_graphs())
def test_bad_count_matches_definition(case):
    G, chi = case
    for v in range(G.n):
        if chi[v] is not None:
            assert bad_count(v, chi, G) == bad_count_brute(v, chi, G.adj)


# -- hom* ---------------------------------------------------------------------


def test_hom_star_examples():
    K3 = complete_graph(3)
    assert count_locally_injective_homs(cycle_graph(4), K3) == 0
    assert count_locally_injective_homs(cycle_graph(6), K3) == 6
    assert count_locally_injective_homs(complete_graph(2), complete_graph(2)) == 2


def test_hom_star_examples_match_brute():
    K3 = complete_graph(3)
    assert hom_star_brute(cycle_graph(4), K3) == 0
    assert hom_star_brute(cycle_graph(6), K3) == 6


def test_hom_star_disconnected_pattern():
    F = make_graph(3, [(0, 1)])  # an edge plus an isolated vertex
    T = cycle_graph(5)
    assert count_locally_injective_homs(F, T) == 10 * 5 == hom_star_brute(F, T)


def test_hom_star_early_exit():
    assert count_locally_injective_homs(cycle_graph(6), complete_graph(3), early_exit=True) >= 1


def test_hom_star_random_pairs():
    rng = random.Random(7)
    for _ in range(40):
        fn, tn = rng.randint(2, 5), rng.randint(2, 6)
        F = make_graph(fn, [e for e in itertools.combinations(range(fn), 2) if rng.random() < 0.6])
        T = make_graph(tn, [e for e in itertools.combinations(range(tn), 2) if rng.random() < 0.6])
        assert count_locally_injective_homs(F, T) == hom_star_brute(F, T)


def test_is_hom_free_examples():
    fam = parse_family("C4")
    P3 = polarity_graph(3)
    assert is_hom_free(fam, P3)
    assert is_hom_free(fam, P3) == (not contains_pattern(P3, cycle_graph(4)))
    assert not is_hom_free(parse_family("C6"), complete_graph(3))
    for T in (complete_bipartite(3, 4), hypercube(3), cycle_graph(8)):
        assert is_hom_free(parse_family("C3"), T)


CLOSED = ["C4", "C3-C5", "K2,3", "C3+C6", "C3"]


@settings(max_examples=120, deadline=None)
@given(
    st.sampled_from(CLOSED),
    st.integers(2, 7).flatmap(
        lambda n: st.tuples(
            st.just(n), st.lists(st.sampled_from(list(itertools.combinations(range(n), 2))), unique=True)
        )
    ),
)
def test_closed_families_hom_free_iff_pattern_free(spec, graph):
    fam = parse_family(spec)
    T = make_graph(*graph)
    assert is_hom_free(fam, T) == (not any(contains_pattern(T, F) for F in fam.patterns))


# -- witness search -----------------------------------------------------------


def test_witness_c6_is_triangle():
    W = closedness_witness_search(parse_family("C6"), 5)
    assert W == complete_graph(3)
    assert format_edge_list(W) == "3 3\n0 1\n0 2\n1 2\n"


def test_no_witness_for_c4():
    assert closedness_witness_search(parse_family("C4"), 6) is None


def test_no_witness_for_c3():
    assert closedness_witness_search(parse_family("C3"), 4) is None


def test_no_witness_for_c3_c6():
    assert closedness_witness_search(parse_family("C3+C6"), 6) is None


def test_q3_is_not_closed():
    # Q3 is the bipartite double cover of K4: locally injective, never injective
    assert count_locally_injective_homs(hypercube(3), complete_graph(4)) == 24
    assert closedness_witness_search(parse_family("Q3"), 4) == complete_graph(4)


def test_witness_order_limit():
    with pytest.raises(ValueError):
        closedness_witness_search(parse_family("C4"), 9)
