"""F-free template graphs used as colour palettes by the coloring engine.

Three constructions are available:

* ``polarity_graph(q)``: the orthogonality graph on the projective plane over
  GF(q).  C4-free, degrees q and q+1.
* ``incidence_graph(q)``: point/line incidence graph of the same plane.
  (q+1)-regular, bipartite, girth 6.
* ``random_pattern_free(m, family, seed)``: G(m, p) followed by deletion of
  one edge from every remaining forbidden copy.

``build_template`` picks the smallest admissible construction of order at
least ``alpha * d`` and audits it before handing it out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .graph import (
    Graph,
    contains_pattern,
    cycle_graph,
    find_pattern,
    first_short_cycle,
    from_adjacency,
    girth,
    make_graph,
    parse_edge_list,
    format_edge_list,
)
from .homomorphism import FamilySpec, is_hom_free

__all__ = [
    "TemplateGraph",
    "TemplateError",
    "NoConstructionError",
    "HOM_VERIFY_CAP",
    "is_prime",
    "next_prime",
    "projective_points",
    "polarity_graph",
    "incidence_graph",
    "random_pattern_free",
    "prune_short_cycles",
    "build_template",
    "choose_construction",
    "template_to_text",
    "template_from_text",
]

# direct hom*-freeness check only up to this order; closedness covers the rest
HOM_VERIFY_CAP = 400


class TemplateError(RuntimeError):
    """A template failed its audit (construction bug or degenerate sample)."""


class NoConstructionError(ValueError):
    """No construction in this package handles the requested family."""


@dataclass(frozen=True)
class TemplateGraph:
    graph: Graph
    construction_tag: str

    def __post_init__(self) -> None:
        if self.graph.n == 0 or self.graph.min_degree < 1:
            raise TemplateError(f"{self.construction_tag}: template has an isolated vertex")

    @property
    def order(self) -> int:
        return self.graph.n

    @property
    def delta(self) -> int:
        return self.graph.min_degree

    @property
    def Delta(self) -> int:
        return self.graph.max_degree

    @property
    def beta(self) -> float:
        return self.Delta / self.delta

    @property
    def p_minus(self) -> float:
        return self.delta / self.order

    @property
    def p_plus(self) -> float:
        return self.Delta / self.order

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency; templates stay in the low thousands."""
        M = np.zeros((self.order, self.order), dtype=bool)
        for u, v in self.graph.edges():
            M[u, v] = M[v, u] = True
        return M

    @cached_property
    def neighbour_rows(self) -> tuple[np.ndarray, ...]:
        """Template neighbourhoods as integer arrays, for bincount-style tallies."""
        return tuple(np.asarray(a, dtype=np.int64) for a in self.graph.adj)

    def metadata(self) -> dict:
        return {
            "construction_tag": self.construction_tag,
            "order": self.order,
            "delta": self.delta,
            "Delta": self.Delta,
            "beta": round(self.beta, 6),
        }


# -- primes and the projective plane -----------------------------------------


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    return all(q % f for f in range(3, math.isqrt(q) + 1, 2))


def next_prime(x: int) -> int:
    q = max(2, x)
    while not is_prime(q):
        q += 1
    return q


def projective_points(q: int) -> list[tuple[int, int, int]]:
    """Representatives of PG(2, q): first nonzero coordinate equal to 1, sorted."""
    pts = [(1, y, z) for y, z in product(range(q), repeat=2)]
    pts += [(0, 1, z) for z in range(q)]
    pts.append((0, 0, 1))
    return sorted(pts)


def _orthogonal_pairs(q: int) -> tuple[list[tuple[int, int, int]], np.ndarray]:
    pts = projective_points(q)
    P = np.array(pts, dtype=np.int64)
    return pts, (P @ P.T) % q == 0


def polarity_graph(q: int) -> Graph:
    """Erdos-Renyi-Sos / Brown polarity graph over GF(q), q prime.

    Points x, y are adjacent iff x . y = 0 (mod q) and x != y.  The q+1
    absolute points (x . x = 0) end up with degree q, all others q+1.
    """
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime (prime powers are not supported)")
    pts, ortho = _orthogonal_pairs(q)
    np.fill_diagonal(ortho, False)
    us, vs = np.nonzero(np.triu(ortho, 1))
    return make_graph(len(pts), zip(us.tolist(), vs.tolist()))


def incidence_graph(q: int) -> Graph:
    """Point-line incidence graph of PG(2, q): points 0..N-1, lines N..2N-1."""
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime (prime powers are not supported)")
    pts, ortho = _orthogonal_pairs(q)
    N = len(pts)
    us, vs = np.nonzero(ortho)
    return make_graph(2 * N, zip(us.tolist(), (vs + N).tolist()))


# -- random deletion constructions -------------------------------------------


def _deletion_exponent(family: FamilySpec) -> float:
    # p = m^{-max_F (v_F - 2)/(e_F - 1)} keeps E[#copies] below E[#edges]/2
    return max((F.n - 2) / (F.m - 1) for F in family.patterns if F.m > 1)


def _heaviest_edge(adj: list[set[int]], edges: list[tuple[int, int]]) -> tuple[int, int]:
    # max endpoint-degree sum, ties to the lexicographically smallest edge
    return min(
        (tuple(sorted(e)) for e in edges),
        key=lambda e: (-(len(adj[e[0]]) + len(adj[e[1]])), e),
    )


def prune_short_cycles(G: Graph, g: int) -> Graph:
    """Delete edges until no cycle of length < g remains.

    Each round takes the first BFS root (in id order) lying on a short cycle,
    extracts that cycle and deletes its edge with the largest endpoint-degree
    sum (ties: smallest edge).  Deleting edges never creates cycles, so roots
    already found clean are not revisited.
    """
    adj = G.mutable_adjacency()
    root = 0
    while True:
        found = first_short_cycle(adj, g, root)
        if found is None:
            break
        root, cycle = found
        ring = [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        u, v = _heaviest_edge(adj, ring)
        adj[u].discard(v)
        adj[v].discard(u)
    return from_adjacency(adj)


def random_pattern_free(m: int, family: FamilySpec, seed: int) -> Graph:
    """Sample G(m, p) and delete one edge from each forbidden copy found.

    For an initial segment of cycles {C3, ..., C_{g-1}} the deletion is
    :func:`prune_short_cycles`; any other family is handled copy by copy with
    the same edge-choice rule.  Vertices left with degree 0 are kept.
    """
    if m < 2:
        raise ValueError("order must be at least 2")
    p = min(1.0, m ** -_deletion_exponent(family))
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(m, 1)
    keep = rng.random(iu.size) < p
    G = make_graph(m, zip(iu[keep].tolist(), ju[keep].tolist()))

    g = family.cycle_girth_bound()
    if g is not None:
        G = prune_short_cycles(G, g)
    else:
        adj = G.mutable_adjacency()
        for F in family.patterns:
            while (phi := find_pattern(adj, F)) is not None:
                image = [(phi[x], phi[y]) for x, y in F.edges()]
                u, v = _heaviest_edge(adj, image)
                adj[u].discard(v)
                adj[v].discard(u)
        G = from_adjacency(adj)
    if G.m == 0:
        raise TemplateError(f"random construction degenerated to no edges (m={m}, seed={seed})")
    return G


def _k_core(G: Graph, k: int) -> Graph:
    """Induced subgraph on the k-core, relabelled to 0..n'-1 in id order."""
    adj = G.mutable_adjacency()
    alive = [True] * G.n
    stack = [v for v in range(G.n) if len(adj[v]) < k]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for w in adj[v]:
            adj[w].discard(v)
            if alive[w] and len(adj[w]) < k:
                stack.append(w)
        adj[v].clear()
    keep = [v for v in range(G.n) if alive[v]]
    index = {v: i for i, v in enumerate(keep)}
    return from_adjacency([[index[w] for w in adj[v]] for v in keep])


# -- dispatch -----------------------------------------------------------------


def _smallest_prime(order_of, target: int) -> int:
    q = 2
    while order_of(q) < target:
        q = next_prime(q + 1)
    return q


def choose_construction(family: FamilySpec) -> str:
    """Name of the construction used for ``family``: polarity, incidence or random."""
    C4 = cycle_graph(4)
    if all(contains_pattern(F, C4) for F in family.patterns):
        return "polarity"
    if all(girth(F, limit=5) <= 5 for F in family.patterns):
        return "incidence"
    if family.detection_hint in ("cycle-list", "complete-bipartite"):
        return "random"
    raise NoConstructionError(
        f"no template construction for family {family.name!r}; supported: families whose "
        "patterns all contain C4 (polarity), all have a cycle of length <= 5 (incidence), "
        "cycle lists, or complete bipartite graphs (random deletion)"
    )


def build_template(family: FamilySpec, d: int, alpha: float, seed: int = 0) -> TemplateGraph:
    """Smallest admissible template of order >= alpha*d, audited.

    The audit re-derives degrees, checks every pattern with
    ``contains_pattern`` and, for orders up to :data:`HOM_VERIFY_CAP`, checks
    hom*-freeness directly.  Above the cap the family's closedness claim
    carries hom*-freeness; an unclosed family above the cap is refused.
    """
    if d < 4:
        raise ValueError("template construction needs d >= 4")
    target = math.ceil(alpha * d)
    kind = choose_construction(family)

    if kind == "polarity":
        q = _smallest_prime(lambda q: q * q + q + 1, target)
        expected_beta = (q + 1) / q
        T = TemplateGraph(polarity_graph(q), f"polarity(q={q})")
    elif kind == "incidence":
        q = _smallest_prime(lambda q: 2 * (q * q + q + 1), target)
        expected_beta = 1.0
        T = TemplateGraph(incidence_graph(q), f"incidence(q={q})")
    else:
        T = _random_template(family, target, seed)
        expected_beta = T.beta
    if alpha < 32 * expected_beta:
        raise ValueError(
            f"alpha={alpha} is below 32*beta={32 * expected_beta:.4f} for {T.construction_tag}"
        )
    audit_template(T, family, target)
    return T


def _random_template(family: FamilySpec, target: int, seed: int) -> TemplateGraph:
    m = target
    for attempt in range(64):
        G = random_pattern_free(m, family, seed + attempt)
        mean_degree = 2 * G.m / G.n
        core = _k_core(G, max(1, int(mean_degree // 2)))
        if core.n >= target:
            return TemplateGraph(core, f"random(m={m},seed={seed + attempt},core={core.n})")
        m = math.ceil(m * 1.25)
    raise TemplateError(f"random construction never reached order {target}")


def audit_template(T: TemplateGraph, family: FamilySpec, target: int = 0) -> None:
    G = T.graph
    if G.n < target:
        raise TemplateError(f"{T.construction_tag}: order {G.n} below required {target}")
    if T.delta < 1:
        raise TemplateError(f"{T.construction_tag}: min degree 0")
    for F in family.patterns:
        if contains_pattern(G, F):
            raise TemplateError(f"{T.construction_tag}: contains forbidden pattern {F!r}")
    if G.n <= HOM_VERIFY_CAP:
        if not is_hom_free(family, G):
            raise TemplateError(f"{T.construction_tag}: admits a locally injective homomorphism")
    elif not family.closed and _closed_core(family, G) is None:
        raise TemplateError(
            f"{T.construction_tag}: order {G.n} exceeds the direct hom* check cap "
            f"({HOM_VERIFY_CAP}) and family {family.name!r} is not known to be closed"
        )


def _closed_core(family: FamilySpec, G: Graph) -> tuple[Graph, ...] | None:
    """A closed family C such that every pattern contains a member of C and G is C-free.

    Restricting a locally injective homomorphism to a subgraph keeps it locally
    injective, so such a C certifies hom*(F, G) = 0 for the whole family.
    """
    for core in ((cycle_graph(4),), tuple(cycle_graph(k) for k in (3, 4, 5))):
        covers = all(any(contains_pattern(F, C) for C in core) for F in family.patterns)
        if covers and not any(contains_pattern(G, C) for C in core):
            return core
    return None


# -- file format --------------------------------------------------------------


def template_to_text(T: TemplateGraph) -> str:
    meta = T.metadata()
    header = " ".join(f"{k}={v}" for k, v in meta.items())
    return format_edge_list(T.graph, header)


def template_from_text(text: str) -> TemplateGraph:
    G, comments = parse_edge_list(text)
    tag = "imported"
    for line in comments:
        for token in line.split():
            if token.startswith("construction_tag="):
                tag = token.split("=", 1)[1]
    return TemplateGraph(G, tag)
