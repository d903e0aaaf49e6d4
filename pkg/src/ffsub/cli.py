"""Command-line front end: template, solve, experiment, verify and witness.

Exit codes: 0 success (and verified), 1 retries exhausted, 2 user or
configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .engine import (
    Params,
    PreconditionError,
    RetriesExhausted,
    VerificationFailure,
    check_family,
    run_pipeline,
)
from .graph import Graph, format_edge_list, random_regular, read_edge_list
from .homomorphism import (
    MAX_WITNESS_ORDER,
    FamilySpec,
    PartialColoring,
    closedness_witness_search,
    parse_family,
)
from .templates import (
    NoConstructionError,
    TemplateError,
    TemplateGraph,
    build_template,
    template_from_text,
    template_to_text,
)
from .verifier import verify_solution

EXIT_OK = 0
EXIT_RETRIES = 1
EXIT_USAGE = 2
EXIT_VERIFY = 3

CSV_COLUMNS = (
    "seed",
    "n",
    "d",
    "family",
    "alpha",
    "template_order",
    "template_delta",
    "template_Delta",
    "min_deg_H",
    "target_deg",
    "ratio",
    "tau",
    "retries",
    "verified",
    "runtime_ms",
)

SUPPORTED_FAMILIES = (
    "C4, K2,t or any family whose members all contain C4 (polarity graph); "
    "C3-C5 or any family whose members all have girth <= 5 (incidence graph); "
    "other cycle lists and K_{a,b} lists (random deletion)"
)


class UsageError(Exception):
    """Bad command-line input or configuration: exit code 2."""


# -- coloring files -----------------------------------------------------------


def format_coloring(chi: Sequence[Optional[int]]) -> str:
    return "".join(f"{v} {'-' if c is None else c}\n" for v, c in enumerate(chi))


def parse_coloring(text: str, n: int | None = None) -> PartialColoring:
    """Read ``v color`` lines; ``-`` marks an uncoloured vertex."""
    entries: dict[int, Optional[int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'v color', got {line!r}")
        v = int(parts[0])
        entries[v] = None if parts[1] == "-" else int(parts[1])
    size = n if n is not None else (max(entries) + 1 if entries else 0)
    chi: PartialColoring = [None] * size
    for v, c in entries.items():
        if not 0 <= v < size:
            raise ValueError(f"vertex {v} out of range for n={size}")
        chi[v] = c
    return chi


# -- helpers ------------------------------------------------------------------


def _family(name: str) -> FamilySpec:
    try:
        return parse_family(name)
    except ValueError as exc:
        raise UsageError(f"{exc}; supported families: {SUPPORTED_FAMILIES}") from exc


def _regular_spec(text: str) -> tuple[int, int]:
    try:
        n, d = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--random-regular expects 'n,d', got {text!r}") from exc
    return n, d


def _params(args: argparse.Namespace) -> Params:
    return Params(
        alpha=args.alpha,
        phase2_uncolored_threshold=args.threshold,
        max_phase2_iterations=args.max_iterations,
        max_retries=args.max_retries,
        seed=args.seed,
    )


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _load_graph(path: str) -> Graph:
    try:
        return read_edge_list(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read graph {path!r}: {exc}") from exc


# -- subcommands --------------------------------------------------------------


def cmd_template(args: argparse.Namespace) -> int:
    family = _family(args.family)
    try:
        T = build_template(family, args.d, args.alpha, args.seed)
    except NoConstructionError as exc:
        raise UsageError(str(exc)) from exc
    except TemplateError as exc:
        print(f"template verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write(args.out, template_to_text(T))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    family = _family(args.family)
    if args.graph:
        G = _load_graph(args.graph)
    else:
        n, d = _regular_spec(args.random_regular)
        try:
            G = random_regular(n, d, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    template = None
    if args.template:
        template = template_from_text(Path(args.template).read_text())
    try:
        report = run_pipeline(G, family, _params(args), template)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc
    except RetriesExhausted as exc:
        print(f"retries exhausted: {exc}", file=sys.stderr)
        return EXIT_RETRIES
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = f"subgraph of {report.input_digest[:16]} family={family.name} seed={args.seed}"
    (out / "H.edges").write_text(format_edge_list(report.H, header))
    (out / "coloring.txt").write_text(format_coloring(report.chi))
    (out / "report.json").write_text(report.to_json())
    print(
        f"n={G.n} d={G.max_degree} template={report.template.construction_tag} "
        f"min_deg_H={report.min_degree} target={report.target_degree:.6f} "
        f"tau={report.tau} retries={report.retries} verified={report.verdict.all_ok}"
    )
    return EXIT_OK if report.verdict.all_ok else EXIT_VERIFY


def cmd_verify(args: argparse.Namespace) -> int:
    family = _family(args.family)
    G = _load_graph(args.graph)
    H = _load_graph(args.subgraph)
    try:
        chi = parse_coloring(Path(args.coloring).read_text(), H.n)
        T = template_from_text(Path(args.template).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    verdict = verify_solution(G, H, chi, T, family)
    sys.stdout.write(json.dumps(verdict.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK if verdict.all_ok else EXIT_VERIFY


def cmd_witness(args: argparse.Namespace) -> int:
    family = _family(args.family)
    if args.max_n > MAX_WITNESS_ORDER:
        raise UsageError(f"--max-n must be at most {MAX_WITNESS_ORDER}")
    W = closedness_witness_search(family, args.max_n)
    if W is None:
        print(f"no witness up to n={args.max_n}")
    else:
        sys.stdout.write(format_edge_list(W, f"witness for {family.name}"))
    return EXIT_OK


# -- experiments --------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    d_values: tuple[int, ...]
    n_multiplier: int = 10
    alpha: float = 64.0
    seeds: tuple[int, ...] = ()
    master_seed: int = 0
    caps: dict = field(default_factory=dict)
    output: str | None = None
    jobs: int = 1
    timing: bool = True

    def pairs(self) -> list[tuple[int, int]]:
        """(n, d) per d value; n is bumped by one when n*d would be odd."""
        out = []
        for d in self.d_values:
            n = self.n_multiplier * d
            if n * d % 2:
                n += 1
            if n <= d:
                raise UsageError(f"n={n} must exceed d={d}")
            out.append((n, d))
        return out

    def params(self, seed: int) -> Params:
        return Params(alpha=self.alpha, seed=seed, **self.caps)


_CONFIG_KEYS = {
    "family",
    "d_values",
    "n_multiplier",
    "alpha",
    "seeds",
    "master_seed",
    "caps",
    "output",
    "jobs",
    "timing",
}
_CAP_KEYS = {"max_retries", "max_phase2_iterations", "phase2_uncolored_threshold"}


def derive_seeds(count: int, master_seed: int) -> tuple[int, ...]:
    return tuple(int(s) for s in np.random.SeedSequence(master_seed).generate_state(count))


def load_config(text: str) -> ExperimentConfig:
    """Parse a JSON experiment config.  ``seeds`` is a list or a count."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in ("family", "d_values"):
        if key not in raw:
            raise UsageError(f"config is missing {key!r}")
    caps = raw.get("caps", {})
    if not isinstance(caps, dict) or set(caps) - _CAP_KEYS:
        raise UsageError(f"caps must be an object with keys among {sorted(_CAP_KEYS)}")
    master = int(raw.get("master_seed", 0))
    seeds = raw.get("seeds", [])
    if isinstance(seeds, bool) or not isinstance(seeds, (int, list)):
        raise UsageError("seeds must be a list of integers or a count")
    seeds = derive_seeds(seeds, master) if isinstance(seeds, int) else tuple(int(s) for s in seeds)
    try:
        d_values = tuple(int(d) for d in raw["d_values"])
        return ExperimentConfig(
            family=str(raw["family"]),
            d_values=d_values,
            n_multiplier=int(raw.get("n_multiplier", 10)),
            alpha=float(raw.get("alpha", 64.0)),
            seeds=seeds,
            master_seed=master,
            caps={k: int(v) for k, v in caps.items()},
            output=raw.get("output"),
            jobs=max(1, int(raw.get("jobs", 1))),
            timing=bool(raw.get("timing", True)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config value: {exc}") from exc


@lru_cache(maxsize=None)
def _cached_template(family: str, d: int, alpha: float, seed: int) -> TemplateGraph:
    return build_template(parse_family(family), d, alpha, seed)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def run_experiment_row(cfg: ExperimentConfig, n: int, d: int, seed: int) -> dict:
    """One CSV row.  The template depends on (family, d) only and is shared across seeds."""
    family = parse_family(cfg.family)
    T = _cached_template(cfg.family, d, cfg.alpha, cfg.master_seed)
    params = cfg.params(seed)
    row = {
        "seed": seed,
        "n": n,
        "d": d,
        "family": cfg.family,
        "alpha": cfg.alpha,
        "template_order": T.order,
        "template_delta": T.delta,
        "template_Delta": T.Delta,
        "min_deg_H": "",
        "target_deg": _fmt(T.delta * d / (4 * T.order)),
        "ratio": "",
        "tau": "",
        "retries": params.max_retries,
        "verified": "false",
        "runtime_ms": 0,
    }
    start = time.perf_counter()
    G = random_regular(n, d, seed)
    try:
        rep = run_pipeline(G, family, params, T)
    except (RetriesExhausted, VerificationFailure):
        pass
    else:
        row.update(
            min_deg_H=rep.min_degree,
            target_deg=_fmt(rep.target_degree),
            ratio=_fmt(rep.min_degree / rep.target_degree) if rep.target_degree else "",
            tau=rep.tau,
            retries=rep.retries,
            verified="true" if rep.verdict.all_ok else "false",
        )
    if cfg.timing:
        row["runtime_ms"] = round((time.perf_counter() - start) * 1000)
    return row


def _row_task(job: tuple[ExperimentConfig, int, int, int]) -> dict:
    return run_experiment_row(*job)


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """All rows, ordered by d (config order) and then seed (config order)."""
    family = _family(cfg.family)
    try:
        check_family(family)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc
    pairs = cfg.pairs()
    if not cfg.seeds:
        return []
    for _, d in pairs:
        try:
            T = _cached_template(cfg.family, d, cfg.alpha, cfg.master_seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if cfg.alpha < 32 * T.beta:
            raise UsageError(f"alpha={cfg.alpha} below 32*beta={32 * T.beta:.4f} at d={d}")
    jobs = [(cfg, n, d, s) for n, d in pairs for s in cfg.seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_row_task, jobs))
    return [_row_task(job) for job in jobs]


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_experiment(args: argparse.Namespace) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    cfg = load_config(text)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.no_timing:
        overrides["timing"] = False
    if overrides:
        raw = json.loads(text)
        raw.update(overrides)
        cfg = load_config(json.dumps(raw))
    rows = run_experiment(cfg)
    _write(args.out or cfg.output, rows_to_csv(rows))
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffsub", description="Spanning F-free subgraphs of regular graphs via template colorings."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("template", help="build and audit a template graph")
    p.add_argument("--family", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, default=64.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_template)

    p = sub.add_parser("solve", help="run the pipeline on one graph")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="input graph in edge-list format")
    src.add_argument("--random-regular", metavar="N,D", help="generate a random d-regular graph")
    p.add_argument("--family", required=True)
    p.add_argument("--alpha", type=float, default=64.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--template", help="use this template file instead of building one")
    p.add_argument("--threshold", type=int, help="phase II uncoloured-neighbour threshold")
    p.add_argument("--max-iterations", type=int, help="phase II iteration cap")
    p.add_argument("--max-retries", type=int, default=20)
    p.add_argument("--out-dir", default=".", help="directory for H.edges, coloring.txt, report.json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="run a seeded sweep and write CSV")
    p.add_argument("config", help="JSON experiment config")
    p.add_argument("--out", help="CSV path (default: config 'output', else stdout)")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms=0 for byte-stable CSV")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="check a subgraph and coloring against a template")
    p.add_argument("--graph", required=True)
    p.add_argument("--subgraph", required=True)
    p.add_argument("--coloring", required=True)
    p.add_argument("--template", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("witness", help="search small graphs for a closedness counterexample")
    p.add_argument("--family", required=True)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader (head, grep -m) closed early
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
