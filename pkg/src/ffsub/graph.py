"""Simple undirected graphs on dense integer vertex ids.

Everything downstream (templates, homomorphism search, the coloring engine,
the verifier) works on :class:`Graph`.  A ``Graph`` is immutable; algorithms
that delete edges work on a ``list[set[int]]`` copy obtained from
:meth:`Graph.mutable_adjacency` and freeze it again with :func:`from_adjacency`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Graph",
    "Bipartition",
    "make_graph",
    "from_adjacency",
    "random_regular",
    "bipartize",
    "is_bipartite",
    "girth",
    "find_short_cycle",
    "contains_pattern",
    "find_pattern",
    "cycle_graph",
    "complete_graph",
    "complete_bipartite",
    "hypercube",
    "path_graph",
    "read_edge_list",
    "write_edge_list",
    "format_edge_list",
    "parse_edge_list",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph; ``adj[v]`` is the sorted tuple of neighbours of v."""

    n: int
    adj: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.adj) != self.n:
            raise ValueError(f"adjacency has {len(self.adj)} rows, expected {self.n}")

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adj)

    @cached_property
    def m(self) -> int:
        return sum(self.degrees) // 2

    @property
    def min_degree(self) -> int:
        return min(self.degrees, default=0)

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays, CSR layout of the adjacency."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.degrees)
        indices = np.fromiter(
            (w for a in self.adj for w in a), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, a in enumerate(self.adj):
            for v in a:
                if v > u:
                    yield (u, v)

    def is_regular(self) -> bool:
        return self.n == 0 or self.min_degree == self.max_degree

    def mutable_adjacency(self) -> list[set[int]]:
        return [set(a) for a in self.adj]

    def remove_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = self.mutable_adjacency()
        for u, v in edges:
            adj[u].discard(v)
            adj[v].discard(u)
        return from_adjacency(adj)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Bipartition:
    """Split of the vertex set into sides A (flag 0) and B (flag 1)."""

    side_of: tuple[int, ...]
    A: tuple[int, ...] = field(init=False)
    B: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", tuple(v for v, s in enumerate(self.side_of) if s == 0))
        object.__setattr__(self, "B", tuple(v for v, s in enumerate(self.side_of) if s == 1))


def make_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph, collapsing duplicate and reversed edges.

    Raises ``ValueError`` on loops or endpoints outside ``[0, n)``.
    """
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise ValueError(f"loop at vertex {u}")
        adj[u].add(v)
        adj[v].add(u)
    return from_adjacency(adj)


def from_adjacency(adj: Sequence[Iterable[int]]) -> Graph:
    """Freeze a symmetric adjacency structure (sets or lists) into a Graph."""
    return Graph(len(adj), tuple(tuple(sorted(a)) for a in adj))


# -- generators ---------------------------------------------------------------


def random_regular(n: int, d: int, seed: int) -> Graph:
    """Uniform-ish random d-regular simple graph via stub pairing.

    Stubs are shuffled and paired; pairs forming loops or repeated edges are
    rejected and their stubs re-paired in the next round.  If the leftover
    stubs admit no valid pair, the whole attempt restarts.  Deterministic in
    ``seed``.
    """
    if d < 0 or n <= d:
        raise ValueError(f"need 0 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    if d == 0:
        return make_graph(n, [])

    while True:
        edges = _try_pairing(n, d, rng)
        if edges is not None:
            return make_graph(n, edges)


def _try_pairing(n: int, d: int, rng: np.random.Generator) -> set[tuple[int, int]] | None:
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), d)
    while stubs.size:
        stubs = rng.permutation(stubs)
        leftover: list[int] = []
        for s1, s2 in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                leftover.extend((s1, s2))
        if leftover and not _has_suitable_pair(leftover, edges):
            return None
        stubs = np.array(sorted(leftover), dtype=np.int64)
    return edges


def _has_suitable_pair(stubs: list[int], edges: set[tuple[int, int]]) -> bool:
    distinct = sorted(set(stubs))
    for i, u in enumerate(distinct):
        for v in distinct[i + 1 :]:
            if (u, v) not in edges:
                return True
    return False


def cycle_graph(k: int) -> Graph:
    if k < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return make_graph(k, [(i, (i + 1) % k) for i in range(k)])


def path_graph(k: int) -> Graph:
    return make_graph(k, [(i, i + 1) for i in range(k - 1)])


def complete_graph(k: int) -> Graph:
    return make_graph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b} with the a-side on ids 0..a-1."""
    return make_graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def hypercube(s: int) -> Graph:
    n = 1 << s
    return make_graph(n, [(v, v ^ (1 << i)) for v in range(n) for i in range(s) if v < v ^ (1 << i)])


# -- bipartization ------------------------------------------------------------


def bipartize(G: Graph) -> tuple[Bipartition, Graph]:
    """Bipartite spanning subgraph keeping at least half of every degree.

    Vertices are first placed greedily (opposite the majority of already placed
    neighbours).  Then, scanning in id order, the first vertex with fewer than
    ``ceil(deg/2)`` cross edges is moved to the other side; the cut grows
    strictly with each move, so the loop terminates.
    """
    side = [0] * G.n
    for v in range(G.n):
        placed = [side[w] for w in G.adj[v] if w < v]
        on_b = sum(placed)
        side[v] = 1 if len(placed) - on_b > on_b else 0

    cross = [sum(1 for w in G.adj[v] if side[w] != side[v]) for v in range(G.n)]
    v = 0
    while v < G.n:
        if cross[v] < (G.degree(v) + 1) // 2:
            side[v] ^= 1
            cross[v] = G.degree(v) - cross[v]
            for w in G.adj[v]:
                cross[w] += 1 if side[w] != side[v] else -1
            v = 0
        else:
            v += 1

    parts = Bipartition(tuple(side))
    H = from_adjacency([[w for w in G.adj[u] if side[w] != side[u]] for u in range(G.n)])
    return parts, H


def is_bipartite(G: Graph | Sequence[Iterable[int]]) -> bool:
    adj = G.adj if isinstance(G, Graph) else G
    colour = [-1] * len(adj)
    for s in range(len(adj)):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if colour[w] < 0:
                    colour[w] = colour[u] ^ 1
                    queue.append(w)
                elif colour[w] == colour[u]:
                    return False
    return True


# -- cycles -------------------------------------------------------------------


def _bfs_short_cycle(
    adj: Sequence[Iterable[int]], root: int, bound: float
) -> tuple[int, list[int]] | None:
    """Shortest closed walk through ``root``'s BFS tree with length < bound.

    Returns (length, simple cycle vertices) or None.  The returned cycle is
    simple and no longer than the walk.
    """
    dist = {root: 0}
    parent = {root: -1}
    queue = deque([root])
    best: tuple[int, int, int] | None = None
    while queue:
        u = queue.popleft()
        du = dist[u]
        if 2 * du + 1 >= bound:
            break
        for w in sorted(adj[u]):
            if w not in dist:
                dist[w] = du + 1
                parent[w] = u
                queue.append(w)
            elif w != parent[u] and dist[w] >= du:
                length = du + dist[w] + 1
                if length < bound:
                    bound = length
                    best = (length, u, w)
    if best is None:
        return None
    _, u, w = best
    left = [u]
    while left[-1] != root:
        left.append(parent[left[-1]])
    right = [w]
    while right[-1] != root:
        right.append(parent[right[-1]])
    # trim the shared prefix near the root to obtain a simple cycle
    while len(left) > 1 and len(right) > 1 and left[-2] == right[-2]:
        left.pop()
        right.pop()
    cycle = left + right[-2::-1]
    return len(cycle), cycle


def girth(G: Graph, limit: float = math.inf) -> float:
    """Length of a shortest cycle, ``math.inf`` for forests.

    With ``limit`` set, the search only looks for cycles of length <= limit
    and returns ``math.inf`` if there is none.
    """
    found = find_short_cycle(G.adj, limit + 1)
    return math.inf if found is None else len(found)


def find_short_cycle(
    adj: Sequence[Iterable[int]], g: float, start: int = 0
) -> list[int] | None:
    """A shortest cycle of length < g, scanning BFS roots from ``start`` in id order.

    Returns the first root's shortest cycle only if it is globally shortest;
    callers that only need *some* short cycle use :func:`first_short_cycle`.
    """
    best: list[int] | None = None
    bound = g
    for r in range(start, len(adj)):
        found = _bfs_short_cycle(adj, r, bound)
        if found is not None:
            bound, best = found
            if bound == 3:
                break
    return best


def first_short_cycle(
    adj: Sequence[Iterable[int]], g: float, start: int = 0
) -> tuple[int, list[int]] | None:
    """(root, cycle) for the first root >= start lying on a cycle shorter than g."""
    for r in range(start, len(adj)):
        found = _bfs_short_cycle(adj, r, g)
        if found is not None:
            return r, found[1]
    return None


# -- pattern detection --------------------------------------------------------


def _cycle_length(F: Graph) -> int | None:
    if F.n >= 3 and all(d == 2 for d in F.degrees) and F.m == F.n:
        seen = _component_of(F.adj, 0)
        if len(seen) == F.n:
            return F.n
    return None


def _complete_bipartite_shape(F: Graph) -> tuple[int, int, list[int], list[int]] | None:
    """(a, b, a_side, b_side) with a <= b if F is K_{a,b}, else None."""
    if F.n < 2 or F.m == 0 or len(_component_of(F.adj, 0)) != F.n:
        return None
    colour = _two_colouring(F.adj)
    if colour is None:
        return None
    X = [v for v in range(F.n) if colour[v] == 0]
    Y = [v for v in range(F.n) if colour[v] == 1]
    if F.m != len(X) * len(Y):
        return None
    if len(X) > len(Y):
        X, Y = Y, X
    return len(X), len(Y), X, Y


def _two_colouring(adj: Sequence[Iterable[int]]) -> list[int] | None:
    colour = [-1] * len(adj)
    for s in range(len(adj)):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if colour[w] < 0:
                    colour[w] = colour[u] ^ 1
                    queue.append(w)
                elif colour[w] == colour[u]:
                    return None
    return colour


def _component_of(adj: Sequence[Iterable[int]], s: int) -> set[int]:
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def search_order(F: Graph) -> list[int]:
    """Pattern vertices in BFS order from a max-degree vertex, component by component."""
    order: list[int] = []
    seen: set[int] = set()
    by_degree = sorted(range(F.n), key=lambda v: (-F.degree(v), v))
    for s in by_degree:
        if s in seen:
            continue
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(F.adj[u], key=lambda x: (-F.degree(x), x)):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _as_adjacency(G: Graph | Sequence[Iterable[int]]) -> tuple[Sequence, list[int]]:
    if isinstance(G, Graph):
        return G.neighbor_sets, list(G.degrees)
    adj = [a if isinstance(a, (set, frozenset)) else set(a) for a in G]
    return adj, [len(a) for a in adj]


def _backtrack_embed(adj: Sequence, deg: list[int], F: Graph) -> dict[int, int] | None:
    """Injective edge-preserving map V(F) -> V(G), or None."""
    order = search_order(F)
    pos = {x: i for i, x in enumerate(order)}
    back = [[y for y in F.adj[x] if pos[y] < pos[x]] for x in order]
    need = [F.degree(x) for x in order]
    n = len(adj)
    phi = [-1] * len(order)
    used: set[int] = set()

    def candidates(i: int) -> Iterable[int]:
        mapped = back[i]
        if not mapped:
            return (v for v in range(n) if deg[v] >= need[i] and v not in used)
        anchor = min((phi[pos[y]] for y in mapped), key=lambda v: deg[v])
        others = [adj[phi[pos[y]]] for y in mapped if phi[pos[y]] != anchor]
        return (
            v
            for v in sorted(adj[anchor])
            if v not in used and deg[v] >= need[i] and all(v in o for o in others)
        )

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        for v in candidates(i):
            phi[i] = v
            used.add(v)
            if extend(i + 1):
                return True
            used.discard(v)
        phi[i] = -1
        return False

    if extend(0):
        return {x: phi[pos[x]] for x in order}
    return None


def _find_complete_bipartite(
    adj: Sequence, deg: list[int], a: int, b: int
) -> tuple[list[int], list[int]] | None:
    """Sets S (|S| = a) and T (|T| = b) with S x T all edges, or None."""
    n = len(adj)
    if a == 1:
        for v in range(n):
            if deg[v] >= b:
                return [v], sorted(adj[v])[:b]
        return None

    def grow(S: list[int], common: set[int]) -> tuple[list[int], list[int]] | None:
        if len(S) == a:
            return S, sorted(common)[:b]
        counts: dict[int, int] = {}
        for c in common:
            for w in adj[c]:
                if w > S[-1]:
                    counts[w] = counts.get(w, 0) + 1
        for w in sorted(x for x, k in counts.items() if k >= b):
            found = grow(S + [w], common & set(adj[w]))
            if found is not None:
                return found
        return None

    if a == 2 and isinstance(adj, tuple) and n > 200:
        return _find_k2b_numpy(adj, deg, b)
    for v in range(n):
        if deg[v] >= b:
            found = grow([v], set(adj[v]))
            if found is not None:
                return found
    return None


def _find_k2b_numpy(adj: Sequence, deg: list[int], b: int) -> tuple[list[int], list[int]] | None:
    n = len(adj)
    rows = [np.fromiter(sorted(a), dtype=np.int64, count=len(a)) for a in adj]
    for v in range(n):
        if deg[v] < b or deg[v] == 0:
            continue
        two = np.concatenate([rows[w] for w in rows[v]]) if len(rows[v]) else rows[v]
        counts = np.bincount(two, minlength=n)
        counts[v] = 0
        hits = np.nonzero(counts >= b)[0]
        if hits.size:
            w = int(hits[0])
            common = sorted(set(adj[v]) & set(adj[w]))
            return sorted((v, w)), common[:b]
    return None


def find_pattern(G: Graph | Sequence[Iterable[int]], F: Graph) -> dict[int, int] | None:
    """A copy of F in G (not necessarily induced) as a vertex map, or None.

    Fast paths: K_{a,b} by common-neighbourhood counting; odd patterns in
    bipartite hosts; cycles via bounded BFS.  Everything else falls back to
    backtracking over injective maps with degree pruning.
    """
    adj, deg = _as_adjacency(G)
    if F.n == 0:
        return {}
    if F.n > len(adj) or F.m > sum(deg) // 2:
        return None
    if F.m == 0:
        return {x: x for x in range(F.n)}

    kab = _complete_bipartite_shape(F)
    if kab is not None:
        a, b, X, Y = kab
        found = _find_complete_bipartite(adj, deg, a, b)
        if found is None:
            return None
        S, T = found
        return {**dict(zip(X, S)), **dict(zip(Y, T))}

    if not is_bipartite(F) and is_bipartite(adj):
        return None

    k = _cycle_length(F)
    if k is not None:
        cycle = find_short_cycle(adj, k + 1)
        if cycle is None:
            return None
        if len(cycle) == k:
            return dict(enumerate(_cycle_from_pattern_order(F, cycle)))
        return _backtrack_embed(adj, deg, F)

    # a pattern containing a short cycle cannot live in a host without one
    g_f = girth(F, limit=4)
    if g_f <= 4 and find_pattern(adj, cycle_graph(int(g_f))) is None:
        return None
    return _backtrack_embed(adj, deg, F)


def _cycle_from_pattern_order(F: Graph, cycle: list[int]) -> list[int]:
    # F is a k-cycle whose vertex labels need not run 0-1-...; walk it from 0
    walk = [0]
    prev = -1
    while len(walk) < F.n:
        nxt = next(w for w in F.adj[walk[-1]] if w != prev)
        prev = walk[-1]
        walk.append(nxt)
    image = [0] * F.n
    for x, v in zip(walk, cycle):
        image[x] = v
    return image


def contains_pattern(G: Graph | Sequence[Iterable[int]], F: Graph) -> bool:
    """True iff G contains a (not necessarily induced) subgraph isomorphic to F."""
    return find_pattern(G, F) is not None


# -- edge-list files ----------------------------------------------------------


def format_edge_list(G: Graph, header: str | None = None) -> str:
    lines = []
    if header is not None:
        lines.append(f"# {header}")
    lines.append(f"{G.n} {G.m}")
    lines.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> tuple[Graph, list[str]]:
    """Parse the ``n m`` / ``u v`` format; returns the graph and any ``#`` comment lines."""
    comments: list[str] = []
    rows: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        rows.append(line.split())
    if not rows:
        raise ValueError("edge list is empty")
    try:
        n, m = (int(x) for x in rows[0])
        edges = [(int(u), int(v)) for u, v in rows[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise ValueError(f"header promises {m} edges, found {len(edges)}")
    return make_graph(n, edges), comments


def write_edge_list(G: Graph, path: str | Path, header: str | None = None) -> None:
    Path(path).write_text(format_edge_list(G, header))


def read_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())[0]
