"""Locally injective homomorphisms and the Bad-count used by both coloring phases.

A map phi: V(F) -> V(T) is a locally injective homomorphism when every edge
of F lands on an edge of T and, for every vertex x of F, phi is injective on
N_F(x).  Equivalently: adjacent vertices map to adjacent vertices and any two
vertices with a common neighbour get distinct images.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

from .graph import (
    Graph,
    _component_of,
    complete_bipartite,
    contains_pattern,
    cycle_graph,
    from_adjacency,
    hypercube,
    is_bipartite,
    read_edge_list,
    search_order,
)

__all__ = [
    "PartialColoring",
    "FamilySpec",
    "parse_family",
    "bad_count",
    "count_locally_injective_homs",
    "is_hom_free",
    "closedness_witness_search",
    "MAX_WITNESS_ORDER",
]

# vertex -> colour (a template vertex id), None while uncoloured
PartialColoring = list[Optional[int]]

MAX_WITNESS_ORDER = 8


@dataclass(frozen=True)
class FamilySpec:
    """A family of forbidden patterns.

    ``closed`` is a claim: absence of locally injective homomorphisms from every
    pattern into a graph is equivalent to the graph being pattern-free.  It is
    inferred for the families known to have this property (initial cycle
    segments, complete bipartite graphs, {C_p, C_2p} for odd prime p) and
    may be passed explicitly otherwise.
    """

    patterns: tuple[Graph, ...]
    name: str = "custom"
    closed: bool = False
    detection_hint: str = "generic"
    cycle_lengths: tuple[int, ...] = field(default=(), compare=False)

    @property
    def is_bipartite_family(self) -> bool:
        """chi(F) = 2: the family's chromatic number is the minimum over members."""
        return any(is_bipartite(F) and F.m > 0 for F in self.patterns)

    @property
    def has_forest(self) -> bool:
        return any(F.m == F.n - _num_components(F) for F in self.patterns)

    def cycle_girth_bound(self) -> int | None:
        """g if the family is exactly {C3, ..., C_{g-1}}, else None."""
        if self.detection_hint != "cycle-list" or not self.cycle_lengths:
            return None
        lengths = sorted(self.cycle_lengths)
        if lengths == list(range(3, lengths[-1] + 1)):
            return lengths[-1] + 1
        return None


def _num_components(F: Graph) -> int:
    seen: set[int] = set()
    count = 0
    for v in range(F.n):
        if v not in seen:
            seen |= _component_of(F.adj, v)
            count += 1
    return count


def _is_odd_prime(p: int) -> bool:
    return p > 2 and all(p % f for f in range(2, int(p**0.5) + 1))


_CYCLE = re.compile(r"^C(\d+)$")
_CYCLE_RANGE = re.compile(r"^C(\d+)-C?(\d+)$")
_KAB = re.compile(r"^K(\d+),(\d+)$")
_CUBE = re.compile(r"^Q(\d+)$")


def parse_family(spec: str) -> FamilySpec:
    """Parse a family name such as ``C4``, ``C3-C5``, ``K2,3``, ``Q3`` or ``C3+C6``.

    Members are separated by ``+`` (or whitespace).  A token naming an existing
    file is read as a pattern in edge-list format.
    """
    tokens = [t for t in re.split(r"[+\s]+", spec.strip()) if t]
    if not tokens:
        raise ValueError("empty family specification")
    files: list[Graph] = []
    cycles: list[int] = []
    kinds: set[str] = set()
    kab: list[tuple[int, int]] = []
    cubes: list[int] = []
    for tok in tokens:
        if m := _CYCLE_RANGE.match(tok):
            lo, hi = int(m[1]), int(m[2])
            if lo < 3 or hi < lo:
                raise ValueError(f"bad cycle range {tok!r}")
            cycles.extend(range(lo, hi + 1))
            kinds.add("cycle")
        elif m := _CYCLE.match(tok):
            if int(m[1]) < 3:
                raise ValueError(f"cycle length must be at least 3 in {tok!r}")
            cycles.append(int(m[1]))
            kinds.add("cycle")
        elif m := _KAB.match(tok):
            a, b = sorted((int(m[1]), int(m[2])))
            if a < 1:
                raise ValueError(f"bad complete bipartite pattern {tok!r}")
            kab.append((a, b))
            kinds.add("kab")
        elif m := _CUBE.match(tok):
            if int(m[1]) < 1:
                raise ValueError(f"bad hypercube {tok!r}")
            cubes.append(int(m[1]))
            kinds.add("cube")
        elif Path(tok).is_file():
            files.append(read_edge_list(tok))
            kinds.add("file")
        else:
            raise ValueError(
                f"unknown pattern {tok!r}; expected C<k>, C<a>-C<b>, K<a>,<b>, Q<s> or a file"
            )

    cycles = sorted(set(cycles))
    kab = sorted(set(kab))
    cubes = sorted(set(cubes))
    patterns = [cycle_graph(k) for k in cycles]
    patterns += [complete_bipartite(a, b) for a, b in kab]
    patterns += [hypercube(s) for s in cubes] + files

    closed = False
    hint = "generic"
    if kinds == {"cycle"}:
        hint = "cycle-list"
        closed = cycles == list(range(3, cycles[-1] + 1)) or (
            len(cycles) == 2 and cycles[1] == 2 * cycles[0] and _is_odd_prime(cycles[0])
        )
        if cycles == [4]:
            hint, closed = "complete-bipartite", True
    elif kinds == {"kab"}:
        hint = "complete-bipartite"
        closed = True
    elif kinds == {"cube"}:
        hint = "hypercube3" if cubes == [3] else "generic"
        # Q3 is not closed: it double-covers K4, which is Q3-free
        closed = set(cubes) <= {1, 2}
    return FamilySpec(tuple(patterns), spec.strip(), closed, hint, tuple(cycles))


# -- Bad ----------------------------------------------------------------------


def bad_count(v: int, chi: Sequence[Optional[int]], G: Graph) -> int:
    """Number of neighbours u of v whose neighbourhood repeats v's colour.

    Only coloured vertices can clash; ``v`` itself must be coloured.
    """
    c = chi[v]
    if c is None:
        raise ValueError(f"vertex {v} is uncoloured")
    total = 0
    for u in G.adj[v]:
        for w in G.adj[u]:
            if w != v and chi[w] == c:
                total += 1
                break
    return total


# -- hom* ---------------------------------------------------------------------


def _components(F: Graph) -> list[Graph]:
    out = []
    seen: set[int] = set()
    for v in range(F.n):
        if v in seen:
            continue
        comp = sorted(_component_of(F.adj, v))
        seen.update(comp)
        index = {x: i for i, x in enumerate(comp)}
        out.append(from_adjacency([[index[w] for w in F.adj[x]] for x in comp]))
    return out


def _count_connected(F: Graph, T: Graph, early_exit: bool) -> int:
    if F.n == 1:
        return T.n
    adj = T.neighbor_sets
    deg = T.degrees
    order = search_order(F)
    pos = {x: i for i, x in enumerate(order)}
    back = [[pos[y] for y in F.adj[x] if pos[y] < pos[x]] for x in order]
    # earlier vertices sharing a neighbour with x must get a different image
    coloc = []
    for x in order:
        mates = {y for w in F.adj[x] for y in F.adj[w] if y != x}
        coloc.append([pos[y] for y in mates if pos[y] < pos[x]])
    need = [F.degree(x) for x in order]
    k = len(order)
    phi = [-1] * k

    def extend(i: int) -> int:
        if i == k:
            return 1
        if back[i]:
            first = phi[back[i][0]]
            rest = [adj[phi[j]] for j in back[i][1:]]
            pool = sorted(adj[first])
        else:
            rest = []
            pool = range(T.n)
        banned = {phi[j] for j in coloc[i]}
        total = 0
        for v in pool:
            if deg[v] < need[i] or v in banned or not all(v in r for r in rest):
                continue
            phi[i] = v
            total += extend(i + 1)
            if total and early_exit:
                break
        phi[i] = -1
        return total

    return extend(0)


def count_locally_injective_homs(F: Graph, T: Graph, early_exit: bool = False) -> int:
    """hom*(F, T).  With ``early_exit`` any positive return only means "at least one".

    Backtracks over V(F) in BFS order from a max-degree vertex; disconnected
    patterns are counted component by component.
    """
    total = 1
    for comp in _components(F):
        c = _count_connected(comp, T, early_exit)
        if c == 0:
            return 0
        total *= c
    return total


def is_hom_free(family: FamilySpec, T: Graph) -> bool:
    """True iff hom*(F, T) = 0 for every pattern in the family."""
    return all(count_locally_injective_homs(F, T, early_exit=True) == 0 for F in family.patterns)


def closedness_witness_search(family: FamilySpec, max_n: int) -> Graph | None:
    """First small graph that is F-free yet admits a locally injective homomorphism.

    Graphs are enumerated by order k = 1..max_n, then by edge subset of the
    lexicographically ordered vertex pairs (bit i of the mask = pair i).  A
    returned graph disproves the family's closedness; ``None`` only means no
    counterexample exists up to ``max_n`` vertices.
    """
    if max_n > MAX_WITNESS_ORDER:
        raise ValueError(f"max_n={max_n} exceeds the exhaustive limit {MAX_WITNESS_ORDER}")
    # phi(x) needs at least deg_F(x) neighbours, so some host vertex must reach min_F Delta(F)
    need = min(F.max_degree for F in family.patterns)
    for k in range(1, max_n + 1):
        pairs = list(combinations(range(k), 2))
        for mask in range(1 << len(pairs)):
            adj: list[list[int]] = [[] for _ in range(k)]
            for i, (u, v) in enumerate(pairs):
                if mask >> i & 1:
                    adj[u].append(v)
                    adj[v].append(u)
            if max((len(a) for a in adj), default=0) < need:
                continue
            T = from_adjacency(adj)
            if is_hom_free(family, T):
                continue
            if not any(contains_pattern(T, F) for F in family.patterns):
                return T
    return None
