"""Two-phase randomized coloring that carves an F-free spanning subgraph out of G.

Phase I colours the A side of a bipartite spanning subgraph: a uniform random
colour per vertex, uncolouring vertices with too many clashes, then a greedy
pass over the uncoloured ones.  Phase II colours B in rounds, keeping a colour
only when few of its good edges clash, and finishes with a greedy pass.  Every
retained colour is followed by deletion of the edges that would break
rainbow neighbourhoods or map to a non-edge of the template.

Colours are template vertices, so the final coloring is a homomorphism
H -> template that is injective on every neighbourhood; a forbidden copy in H
would give a locally injective homomorphism into the template.

"With positive probability" steps become a bounded retry loop in
:func:`run_pipeline`.  Degree guarantees (P1, P3, Q1) are measured and
reported; structural ones (P2, Q2, Q3) are asserted on every run.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .graph import Bipartition, Graph, bipartize, format_edge_list, from_adjacency
from .homomorphism import FamilySpec, PartialColoring
from .templates import TemplateGraph, build_template
from .verifier import Verdict, verify_phase1, verify_solution

__all__ = [
    "Params",
    "Phase2State",
    "SolutionReport",
    "PreconditionError",
    "Phase2CapExceeded",
    "RetriesExhausted",
    "VerificationFailure",
    "phase1",
    "check_P3",
    "p3_min_count",
    "phase2_iteration",
    "phase2",
    "run_pipeline",
]


class PreconditionError(ValueError):
    """Input graph, family or parameters violate the pipeline's preconditions."""


class Phase2CapExceeded(RuntimeError):
    def __init__(self, state: "Phase2State") -> None:
        super().__init__(f"phase II did not terminate within {state.iteration} iterations")
        self.state = state


class RetriesExhausted(RuntimeError):
    def __init__(self, message: str, attempts: list[dict]) -> None:
        super().__init__(message)
        self.attempts = attempts


class VerificationFailure(AssertionError):
    """The independent verifier rejected an engine output: a bug, never expected."""


@dataclass(frozen=True)
class Params:
    """Run parameters.

    ``phase2_uncolored_threshold`` defaults to ceil(sqrt(delta(template))) and
    ``max_phase2_iterations`` to ceil(10 log2 d) + 5.
    """

    alpha: float = 64.0
    phase2_uncolored_threshold: Optional[int] = None
    max_phase2_iterations: Optional[int] = None
    max_retries: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise PreconditionError("alpha must be positive")
        for name in ("phase2_uncolored_threshold", "max_phase2_iterations"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise PreconditionError(f"{name} must be positive")
        if self.max_retries < 0:
            raise PreconditionError("max_retries must be non-negative")

    def uncolored_threshold(self, template: TemplateGraph) -> int:
        if self.phase2_uncolored_threshold is not None:
            return self.phase2_uncolored_threshold
        return math.ceil(math.sqrt(template.delta))

    def iteration_cap(self, d: int) -> int:
        if self.max_phase2_iterations is not None:
            return self.max_phase2_iterations
        return math.ceil(10 * math.log2(max(d, 2))) + 5


class _Palette:
    """Template lookups shared by both phases."""

    def __init__(self, template: TemplateGraph, d: int) -> None:
        self.template = template
        self.K = template.order
        self.d = d
        self.alpha_hat = self.K / d
        self.M = template.adjacency_matrix
        self.rows = template.neighbour_rows

    def neighbourhood_counts(self, colours: Sequence[int]) -> np.ndarray:
        """counts[c] = number of listed colours adjacent to c in the template."""
        if not colours:
            return np.zeros(self.K, dtype=np.int64)
        return np.bincount(np.concatenate([self.rows[c] for c in colours]), minlength=self.K)


def _pick_colour(bad: np.ndarray, good: np.ndarray) -> int:
    # min Bad, then max good-and-unconflicted neighbours, then smallest id
    cand = np.flatnonzero(bad == bad.min())
    return int(cand[np.argmax(good[cand])])


def _decrement(counter: Counter, key: int) -> None:
    counter[key] -= 1
    if counter[key] <= 0:
        del counter[key]


def _rainbow_at(adj: Sequence[set[int]], chi: Sequence[Optional[int]], v: int) -> bool:
    seen = [chi[w] for w in adj[v] if chi[w] is not None]
    return len(seen) == len(set(seen))


# -- Phase I ------------------------------------------------------------------


def p3_min_count(
    H: Graph, chi: Sequence[Optional[int]], template: TemplateGraph, B: Sequence[int] | None = None
) -> int:
    """min over b in B, c in V(template) of #{a in N_H(b): chi(a) c is a template edge}.

    B defaults to the uncoloured vertices of ``chi``.
    """
    if B is None:
        B = [v for v in range(H.n) if chi[v] is None]
    if not B:
        return 0
    rows = template.neighbour_rows
    best = None
    for b in B:
        cols = [chi[a] for a in H.adj[b] if chi[a] is not None]
        if not cols:
            return 0
        counts = np.bincount(np.concatenate([rows[c] for c in cols]), minlength=template.order)
        low = int(counts.min())
        best = low if best is None else min(best, low)
        if best == 0:
            break
    return best


def check_P3(
    H: Graph,
    chi_A: Sequence[Optional[int]],
    template: TemplateGraph,
    d: int | None = None,
    B: Sequence[int] | None = None,
) -> bool:
    """Every b sees, for every colour c, at least delta/(2 alpha_hat) neighbours coloured next to c."""
    if B is None:
        B = [v for v in range(H.n) if chi_A[v] is None]
    if not B:
        return True
    d = d or H.max_degree
    bound = template.delta / (2 * template.order / d)
    return p3_min_count(H, chi_A, template, B) >= bound


def phase1(
    H0: Graph,
    sides: Bipartition,
    template: TemplateGraph,
    params: Params,
    rng: np.random.Generator,
    d: int | None = None,
) -> tuple[Graph, PartialColoring, dict]:
    """Colour A; returns (H', chi restricted to A, report)."""
    d = d or H0.max_degree
    pal = _Palette(template, d)
    K = pal.K
    adj = H0.mutable_adjacency()
    A, B = sides.A, sides.B
    chi: PartialColoring = [None] * H0.n

    # step 1: tentative uniform colours, drawn in increasing vertex id
    for a, c in zip(A, rng.integers(0, K, size=len(A)).tolist()):
        chi[a] = c
    seen_at = [Counter(chi[a] for a in adj[b]) for b in range(H0.n)]
    bad0 = {a: sum(1 for b in adj[a] if seen_at[b][chi[a]] >= 2) for a in A}
    limit = d / math.sqrt(pal.alpha_hat)
    retained = [a for a in A if bad0[a] < limit]
    for a in A:
        if bad0[a] >= limit:
            chi[a] = None
    uncoloured = [a for a in A if chi[a] is None]

    # step 2: drop every edge where two retained colours meet at the same b
    bcol = [Counter(chi[a] for a in adj[b] if chi[a] is not None) for b in range(H0.n)]
    doomed = [(a, b) for a in retained for b in adj[a] if bcol[b][chi[a]] >= 2]
    lost = Counter(a for a, _ in doomed)
    for a in retained:
        assert lost[a] <= bad0[a] < limit, "step-2 deletions exceed Bad"
    for a, b in doomed:
        _decrement(bcol[b], chi[a])
    for a, b in doomed:
        adj[a].discard(b)
        adj[b].discard(a)
    step2_deleted = len(doomed)

    # steps 3-4: greedy colouring of the rest, ascending id
    pigeonhole = d * d / K
    tail_deleted = 0
    no_good = np.zeros(K, dtype=np.int64)
    for a in uncoloured:
        nbrs = sorted(adj[a])
        keys = [c for b in nbrs for c in bcol[b]]
        bad = np.bincount(np.asarray(keys, dtype=np.int64), minlength=K) if keys else np.zeros(K, dtype=np.int64)
        c = _pick_colour(bad, no_good)
        assert bad[c] <= pigeonhole, "greedy colour exceeds the pigeonhole bound"
        chi[a] = c
        dropped = 0
        for b in nbrs:
            if bcol[b][c] >= 1:
                adj[a].discard(b)
                adj[b].discard(a)
                dropped += 1
            else:
                bcol[b][c] += 1
        assert dropped == bad[c], "greedy deletions differ from Bad"
        tail_deleted += dropped

    H = from_adjacency(adj)
    for b in B:
        assert _rainbow_at(adj, chi, b), "P2 violated after phase I"
    a_min = min((H.degree(a) for a in A), default=0)
    bound = template.delta / (2 * pal.alpha_hat)
    p3_low = p3_min_count(H, chi, template, B)
    report = {
        "retained_random": len(retained),
        "uncoloured_random": len(uncoloured),
        "step2_deleted": step2_deleted,
        "greedy_deleted": tail_deleted,
        "P1": a_min >= d / 2,
        "P1_min_degree": a_min,
        "P2": True,
        "P3": (p3_low >= bound) if B else True,
        "P3_min_count": p3_low,
        "P3_bound": bound,
    }
    return H, chi, report


# -- Phase II -----------------------------------------------------------------


@dataclass
class Phase2State:
    """Mutable state threaded through the Phase II rounds.

    ``adj`` is H_i, ``uncoloured`` is B_i and ``unc_count[a]`` is |B_i(a)|.
    ``acol[a]`` counts the colours of coloured B-neighbours of a in H_i.
    """

    adj: list[set[int]]
    chi: PartialColoring
    A: tuple[int, ...]
    B: tuple[int, ...]
    uncoloured: set[int]
    unc_count: dict[int, int]
    acol: dict[int, Counter]
    base_degree: tuple[int, ...]
    d: int
    threshold: int
    iteration: int = 0
    trace: list[dict] = field(default_factory=list)

    @classmethod
    def start(cls, H: Graph, chi: Sequence[Optional[int]], d: int, threshold: int) -> "Phase2State":
        A = tuple(v for v in range(H.n) if chi[v] is not None)
        B = tuple(v for v in range(H.n) if chi[v] is None)
        adj = H.mutable_adjacency()
        return cls(
            adj=adj,
            chi=list(chi),
            A=A,
            B=B,
            uncoloured=set(B),
            unc_count={a: len(adj[a]) for a in A},
            acol={a: Counter() for a in A},
            base_degree=H.degrees,
            d=d,
            threshold=threshold,
        )

    def max_uncoloured(self) -> int:
        return max(self.unc_count.values(), default=0)


def phase2_iteration(
    state: Phase2State, template: TemplateGraph, rng: np.random.Generator
) -> Phase2State:
    """One random round over B_{i-1}; mutates and returns ``state``."""
    prev = sorted(state.uncoloured)
    if not prev:
        return state
    i = state.iteration + 1
    pal = _Palette(template, state.d)
    M = pal.M
    adj, chi, acol = state.adj, state.chi, state.acol
    tent = dict(zip(prev, rng.integers(0, pal.K, size=len(prev)).tolist()))

    # Bad is taken against every coloured B vertex, tentative ones included
    fresh: Counter = Counter((a, c) for b, c in tent.items() for a in adj[b])
    bad: dict[int, int] = {}
    good: dict[int, int] = {}
    retained: list[int] = []
    for b in prev:
        c = tent[b]
        bad[b] = sum(1 for a in adj[b] if acol[a][c] + fresh[a, c] >= 2)
        good[b] = sum(1 for a in adj[b] if M[chi[a], c])
        if 2 * bad[b] < good[b]:
            retained.append(b)

    kept_colour: Counter = Counter((a, tent[b]) for b in retained for a in adj[b])
    doomed: list[tuple[int, int]] = []
    good_neighs: Counter = Counter()
    for b in retained:
        c = tent[b]
        good_lost = 0
        for a in adj[b]:
            edge_ok = bool(M[chi[a], c])
            if edge_ok:
                good_neighs[a] += 1
            clash = acol[a][c] + kept_colour[a, c] >= 2
            if clash or not edge_ok:
                doomed.append((a, b))
                good_lost += clash and edge_ok
        assert good_lost <= bad[b] and 2 * good_lost < good[b], "retained b lost half its good edges"

    prev_count = dict(state.unc_count)
    for b in retained:
        chi[b] = tent[b]
        state.uncoloured.discard(b)
        for a in adj[b]:
            state.unc_count[a] -= 1
            state.acol[a][chi[b]] += 1
    for a, b in doomed:
        _decrement(state.acol[a], chi[b])
        adj[a].discard(b)
        adj[b].discard(a)
    state.iteration = i

    for b in state.uncoloured:
        assert len(adj[b]) == state.base_degree[b], "uncoloured vertex lost an edge"

    c1_bound = state.d / pal.alpha_hat ** (i / 2)
    c1_bad = sum(1 for a in state.A if state.unc_count[a] > c1_bound)
    p_plus = template.p_plus
    c2_bad = sum(
        1
        for a in state.A
        if good_neighs[a] > max(2 * p_plus * prev_count[a], state.threshold)
    )
    record: dict[str, Any] = {
        "iteration": i,
        "B_prev": len(prev),
        "B_now": len(state.uncoloured),
        "max_B_a": state.max_uncoloured(),
        "retained": len(retained),
        "deleted": len(doomed),
        "good_neighs_total": int(sum(good_neighs.values())),
        "C1": c1_bad == 0,
        "C1_violations": c1_bad,
        "C2": c2_bad == 0,
        "C2_violations": c2_bad,
    }
    if i == 1:
        c3_bound = template.delta / (4 * pal.alpha_hat)
        c3_bad = sum(
            1 for a in state.A if sum(1 for b in adj[a] if chi[b] is not None) < c3_bound
        )
        record["C3"] = c3_bad == 0
        record["C3_violations"] = c3_bad
    state.trace.append(record)
    return state


def phase2(
    H_s: Graph,
    chi_s: Sequence[Optional[int]],
    template: TemplateGraph,
    params: Params,
    rng: np.random.Generator,
    d: int | None = None,
) -> tuple[Graph, PartialColoring, dict]:
    """Colour B.  Raises :class:`Phase2CapExceeded` if the rounds never settle."""
    d = d or H_s.max_degree
    pal = _Palette(template, d)
    state = Phase2State.start(H_s, chi_s, d, params.uncolored_threshold(template))
    cap = params.iteration_cap(d)
    while state.max_uncoloured() > state.threshold:
        if state.iteration >= cap:
            raise Phase2CapExceeded(state)
        phase2_iteration(state, template, rng)
    tau = state.iteration

    adj, chi, M = state.adj, state.chi, pal.M
    tail = sorted(state.uncoloured)
    tail_deleted = 0
    for b in tail:
        nbrs = sorted(adj[b])
        keys = [c for a in nbrs for c in state.acol[a]]
        bad = (
            np.bincount(np.asarray(keys, dtype=np.int64), minlength=pal.K)
            if keys
            else np.zeros(pal.K, dtype=np.int64)
        )
        good = pal.neighbourhood_counts([chi[a] for a in nbrs])
        for a in nbrs:
            for c in state.acol[a]:
                if M[chi[a], c]:
                    good[c] -= 1
        c = _pick_colour(bad, good)
        chi[b] = c
        state.uncoloured.discard(b)
        for a in nbrs:
            state.unc_count[a] -= 1
            if c in state.acol[a] or not M[chi[a], c]:
                adj[a].discard(b)
                adj[b].discard(a)
                tail_deleted += 1
            else:
                state.acol[a][c] += 1

    H = from_adjacency(adj)
    for v in range(H.n):
        assert _rainbow_at(adj, chi, v), "Q2 violated"
    for u, v in H.edges():
        assert M[chi[u], chi[v]], "Q3 violated"
    target = template.delta / (4 * pal.alpha_hat)
    report = {
        "tau": tau,
        "iteration_cap": cap,
        "threshold": state.threshold,
        "trace": state.trace,
        "greedy_coloured": len(tail),
        "greedy_deleted": tail_deleted,
        "min_degree": H.min_degree,
        "mean_degree": round(2 * H.m / H.n, 6) if H.n else 0.0,
        "target_degree": target,
        "Q1": H.min_degree >= target,
        "Q2": True,
        "Q3": True,
    }
    return H, chi, report


# -- driver -------------------------------------------------------------------


@dataclass
class SolutionReport:
    H: Graph
    chi: PartialColoring
    template: TemplateGraph
    verdict: Verdict
    family: str
    seed: int
    params: dict
    input_digest: str
    retries: int
    chosen_attempt: int
    attempts: list[dict]

    @property
    def tau(self) -> int:
        return self.attempts[self.chosen_attempt]["phase2"]["tau"]

    @property
    def min_degree(self) -> int:
        return self.H.min_degree

    @property
    def target_degree(self) -> float:
        return self.verdict.target_degree

    @property
    def degree_target_met(self) -> bool:
        return self.verdict.degree_ok

    def to_dict(self) -> dict:
        return {
            "input_digest": self.input_digest,
            "family": self.family,
            "seed": self.seed,
            "params": self.params,
            "template": self.template.metadata(),
            "retries": self.retries,
            "chosen_attempt": self.chosen_attempt,
            "attempts": self.attempts,
            "tau": self.tau,
            "min_degree_H": self.min_degree,
            "mean_degree_H": round(2 * self.H.m / self.H.n, 6),
            "target_degree": self.target_degree,
            "edges_H": self.H.m,
            "verdict": self.verdict.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def graph_digest(G: Graph) -> str:
    return hashlib.sha256(format_edge_list(G).encode()).hexdigest()


def check_family(family: FamilySpec) -> None:
    if not family.is_bipartite_family:
        raise PreconditionError(f"family {family.name!r} has no bipartite member")
    if family.has_forest:
        raise PreconditionError(f"family {family.name!r} contains a forest")


def run_pipeline(
    G: Graph,
    family: FamilySpec,
    params: Params,
    template: TemplateGraph | None = None,
) -> SolutionReport:
    """Bipartize, build the template, then retry both phases until the degree checks pass.

    An attempt succeeds when P3 and Q1 both hold.  After ``max_retries``
    failed retries the best finished attempt (Q1 first, then min and mean degree) is
    returned; if no attempt finished Phase II, :class:`RetriesExhausted` is
    raised.  The returned subgraph always passed the independent verifier.
    """
    if G.n == 0 or not G.is_regular() or G.max_degree == 0:
        raise PreconditionError("input graph must be d-regular with d >= 1")
    check_family(family)
    d = G.max_degree
    if template is None:
        try:
            template = build_template(family, d, params.alpha, params.seed)
        except ValueError as exc:
            raise PreconditionError(str(exc)) from exc
    if params.alpha < 32 * template.beta:
        raise PreconditionError(
            f"alpha={params.alpha} below 32*beta={32 * template.beta:.4f} of {template.construction_tag}"
        )

    sides, H0 = bipartize(G)
    attempts: list[dict] = []
    results: list[tuple[Graph, PartialColoring, Graph, PartialColoring] | None] = []
    for r in range(params.max_retries + 1):
        derived = params.seed ^ r
        rng = np.random.default_rng(derived)
        H1, chi1, rep1 = phase1(H0, sides, template, params, rng, d)
        record: dict[str, Any] = {"attempt": r, "derived_seed": derived, "phase1": rep1}
        try:
            H, chi, rep2 = phase2(H1, chi1, template, params, rng, d)
        except Phase2CapExceeded as exc:
            record["phase2"] = {"cap_tripped": True, "trace": exc.state.trace}
            record["success"] = False
            attempts.append(record)
            results.append(None)
            continue
        rep2["cap_tripped"] = False
        record["phase2"] = rep2
        record["success"] = bool(rep1["P3"] and rep2["Q1"])
        attempts.append(record)
        results.append((H1, chi1, H, chi))
        if record["success"]:
            break

    finished = [i for i, res in enumerate(results) if res is not None]
    if not finished:
        raise RetriesExhausted(
            f"phase II hit its iteration cap on all {len(attempts)} attempts", attempts
        )
    best = max(
        finished,
        key=lambda i: (
            attempts[i]["success"],
            attempts[i]["phase2"]["Q1"],
            attempts[i]["phase2"]["min_degree"],
            attempts[i]["phase2"]["mean_degree"],
            -i,
        ),
    )
    H1, chi1, H, chi = results[best]
    verdict = verify_solution(G, H, chi, template, family)
    verdict.p_checks = verify_phase1(H1, chi1, template, d)
    if not verdict.all_ok:
        raise VerificationFailure(f"verifier rejected engine output: {verdict.to_dict()}")
    return SolutionReport(
        H=H,
        chi=chi,
        template=template,
        verdict=verdict,
        family=family.name,
        seed=params.seed,
        params=asdict(params),
        input_digest=graph_digest(G),
        retries=len(attempts) - 1,
        chosen_attempt=best,
        attempts=attempts,
    )
