"""Spanning F-free subgraphs of regular graphs with large minimum degree.

A Las Vegas pipeline: bipartize the input, colour both sides with vertices of
an F-free template graph so that every neighbourhood is rainbow and every edge
maps to a template edge, then verify the result independently.
"""

from .engine import (
    Params,
    PreconditionError,
    RetriesExhausted,
    SolutionReport,
    VerificationFailure,
    run_pipeline,
)
from .graph import Graph, bipartize, contains_pattern, make_graph, random_regular
from .homomorphism import (
    FamilySpec,
    bad_count,
    closedness_witness_search,
    count_locally_injective_homs,
    parse_family,
)
from .templates import TemplateGraph, build_template, incidence_graph, polarity_graph
from .verifier import Verdict, verify_solution

__version__ = "0.1.0"

__all__ = [
    "FamilySpec",
    "Graph",
    "Params",
    "PreconditionError",
    "RetriesExhausted",
    "SolutionReport",
    "TemplateGraph",
    "Verdict",
    "VerificationFailure",
    "bad_count",
    "bipartize",
    "build_template",
    "closedness_witness_search",
    "contains_pattern",
    "count_locally_injective_homs",
    "incidence_graph",
    "make_graph",
    "parse_family",
    "polarity_graph",
    "random_regular",
    "run_pipeline",
    "verify_solution",
]
