"""Independent checks of everything the coloring engine claims.

Nothing here reuses engine bookkeeping: containment, rainbow neighbourhoods,
edge consistency and F-freeness are all recomputed from the graphs and the
coloring alone.  F-freeness in particular is decided by ``contains_pattern``
and never inferred from the other checks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .graph import Graph, contains_pattern
from .homomorphism import FamilySpec

__all__ = [
    "Verdict",
    "verify_rainbow",
    "verify_edge_consistency",
    "verify_solution",
    "verify_phase1",
    "is_sorted_sublist",
]


@dataclass
class Verdict:
    spanning: bool
    subgraph: bool
    rainbow: bool
    edge_consistent: bool
    colours_valid: bool
    f_free: bool
    min_degree: int
    target_degree: float
    p_checks: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        """Every structural property holds (the degree target is reported separately)."""
        return (
            self.spanning
            and self.subgraph
            and self.rainbow
            and self.edge_consistent
            and self.colours_valid
            and self.f_free
        )

    @property
    def degree_ok(self) -> bool:
        return self.min_degree >= self.target_degree

    def to_dict(self) -> dict:
        out = asdict(self)
        out["all_ok"] = self.all_ok
        out["degree_ok"] = self.degree_ok
        return out


def verify_rainbow(H: Graph, chi: Sequence[Optional[int]]) -> bool:
    """Coloured vertices in every neighbourhood carry pairwise distinct colours."""
    for v in range(H.n):
        colours = [chi[w] for w in H.adj[v] if chi[w] is not None]
        if len(colours) != len(set(colours)):
            return False
    return True


def verify_edge_consistency(H: Graph, chi: Sequence[Optional[int]], template) -> bool:
    """Every edge of H maps onto a template edge.  Uncoloured endpoints raise ValueError."""
    T = template.graph if hasattr(template, "graph") else template
    for u, v in H.edges():
        cu, cv = chi[u], chi[v]
        if cu is None or cv is None:
            raise ValueError(f"edge ({u}, {v}) has an uncoloured endpoint")
        if not (0 <= cu < T.n and 0 <= cv < T.n) or cv not in T.neighbor_sets[cu]:
            return False
    return True


def is_sorted_sublist(small: Sequence[int], big: Sequence[int]) -> bool:
    """Inclusion of sorted sequences by a single merge pass."""
    j = 0
    for x in small:
        while j < len(big) and big[j] < x:
            j += 1
        if j == len(big) or big[j] != x:
            return False
        j += 1
    return True


def verify_solution(
    G: Graph,
    H: Graph,
    chi: Sequence[Optional[int]],
    template,
    family: FamilySpec,
) -> Verdict:
    T = template.graph
    spanning = H.n == G.n
    subgraph = spanning and all(is_sorted_sublist(H.adj[v], G.adj[v]) for v in range(H.n))
    colours_valid = len(chi) == H.n and all(c is None or 0 <= c < T.n for c in chi)
    try:
        consistent = colours_valid and verify_edge_consistency(H, chi, T)
    except ValueError:
        consistent = False
    order = T.n
    d = G.max_degree
    target = T.min_degree / (4 * order / d) if d else 0.0
    return Verdict(
        spanning=spanning,
        subgraph=subgraph,
        rainbow=verify_rainbow(H, chi) if colours_valid else False,
        edge_consistent=consistent,
        colours_valid=colours_valid,
        f_free=not any(contains_pattern(H, F) for F in family.patterns),
        min_degree=H.min_degree,
        target_degree=target,
    )


def verify_phase1(H1: Graph, chi_A: Sequence[Optional[int]], template, d: int) -> dict:
    """Recompute P1-P3 from the phase-one subgraph and the colouring of A.

    B is the set of uncoloured vertices.  P3 is evaluated by brute force over
    every (b, colour) pair through template adjacency sets.
    """
    T = template.graph
    A = [v for v in range(H1.n) if chi_A[v] is not None]
    B = [v for v in range(H1.n) if chi_A[v] is None]
    alpha_hat = T.n / d
    p1 = all(H1.degree(a) >= d / 2 for a in A)
    p2 = all(
        len({chi_A[a] for a in H1.adj[b]}) == H1.degree(b) for b in B
    )
    bound = T.min_degree / (2 * alpha_hat)
    low = None
    for b in B:
        counts = [0] * T.n
        for a in H1.adj[b]:
            for c in T.adj[chi_A[a]]:
                counts[c] += 1
        m = min(counts)
        low = m if low is None else min(low, m)
    return {
        "P1": p1,
        "P2": p2,
        "P3": low is None or low >= bound,
        "P3_min_count": 0 if low is None else low,
        "P3_bound": bound,
    }
