import random

import numpy as np
import pytest

from ffsub.engine import check_P3, p3_min_count
from ffsub.graph import complete_graph, cycle_graph, make_graph, path_graph
from ffsub.homomorphism import parse_family
from ffsub.templates import TemplateGraph, polarity_graph
from ffsub.verifier import (
    is_sorted_sublist,
    verify_edge_consistency,
    verify_phase1,
    verify_rainbow,
    verify_solution,
)

EDGE = TemplateGraph(make_graph(2, [(0, 1)]), "K2")
K3 = TemplateGraph(complete_graph(3), "K3")


def test_rainbow_examples():
    assert verify_rainbow(make_graph(2, [(0, 1)]), [0, 1])
    assert not verify_rainbow(path_graph(3), [4, 2, 4])
    assert verify_rainbow(make_graph(3, []), [1, 1, 1])
    # uncoloured vertices never clash
    assert verify_rainbow(path_graph(3), [None, 2, None])


def test_edge_consistency_examples():
    H = make_graph(2, [(0, 1)])
    assert verify_edge_consistency(H, [0, 1], EDGE)
    assert not verify_edge_consistency(H, [0, 0], EDGE)
    assert verify_edge_consistency(make_graph(2, []), [0, 0], EDGE)


def test_edge_consistency_uncoloured_endpoint():
    with pytest.raises(ValueError):
        verify_edge_consistency(make_graph(2, [(0, 1)]), [0, None], EDGE)


def test_sorted_sublist():
    assert is_sorted_sublist([1, 4], [0, 1, 2, 4])
    assert not is_sorted_sublist([1, 3], [0, 1, 2, 4])
    assert is_sorted_sublist([], [])


def test_verify_solution_c6():
    G = cycle_graph(6)
    verdict = verify_solution(G, G, [0, 1, 2, 0, 1, 2], K3, parse_family("C4"))
    assert verdict.f_free and verdict.spanning and verdict.subgraph
    assert verdict.rainbow and verdict.edge_consistent and verdict.all_ok
    assert verdict.min_degree == 2


def test_verify_solution_flags_c4():
    G = complete_graph(4)
    H = cycle_graph(4)
    verdict = verify_solution(G, H, [0, 1, 2, 3], TemplateGraph(complete_graph(4), "K4"), parse_family("C4"))
    assert verdict.rainbow and verdict.edge_consistent
    assert not verdict.f_free and not verdict.all_ok


def test_verify_solution_not_a_subgraph():
    G = path_graph(3)
    H = make_graph(3, [(0, 2)])
    verdict = verify_solution(G, H, [0, 1, 1], K3, parse_family("C4"))
    assert not verdict.subgraph and not verdict.all_ok


def test_verify_solution_bad_colours():
    G = path_graph(3)
    verdict = verify_solution(G, G, [0, 1, 7], K3, parse_family("C4"))
    assert not verdict.colours_valid and not verdict.edge_consistent and not verdict.all_ok


def test_verdict_target_and_dict():
    G = cycle_graph(6)
    verdict = verify_solution(G, G, [0, 1, 2, 0, 1, 2], K3, parse_family("C4"))
    # delta(K3) / (4 * |V(K3)| / d) with d = 2
    assert verdict.target_degree == pytest.approx(2 / (4 * 3 / 2))
    assert verdict.degree_ok
    out = verdict.to_dict()
    assert out["all_ok"] is True and out["degree_ok"] is True and out["min_degree"] == 2


def test_phase1_checks_match_engine():
    T = TemplateGraph(polarity_graph(3), "polarity(q=3)")
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randint(4, 14)
        side = [rng.randint(0, 1) for _ in range(n)]
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if side[u] != side[v] and rng.random() < 0.5]
        H = make_graph(n, edges)
        chi = [rng.randrange(T.order) if side[v] == 0 else None for v in range(n)]
        d = max(H.max_degree, 1)
        brute = verify_phase1(H, chi, T, d)
        B = [v for v in range(n) if chi[v] is None]
        if B:
            assert brute["P3_min_count"] == p3_min_count(H, chi, T, B)
            assert brute["P3"] == check_P3(H, chi, T, d)


def test_check_p3_examples():
    T = TemplateGraph(complete_graph(5), "K5")
    # b with no neighbours cannot meet a positive bound
    H = make_graph(2, [])
    assert not check_P3(H, [0, None], T, d=2)
    # complete template, rainbow neighbourhood of b: every colour sees >= 3 of b's 4 neighbours
    H = make_graph(5, [(0, 4), (1, 4), (2, 4), (3, 4)])
    chi = [0, 1, 2, 3, None]
    assert p3_min_count(H, chi, T) == 3
    assert 3 >= T.delta / (2 * T.order / 4)
    assert check_P3(H, chi, T, d=4)
    assert np.isclose(T.delta / (2 * T.order / 4), 1.6)
