"""Command-line front end.

Two subcommands:

* ``mine`` runs the whole pipeline: load CSVs, parse and compile the
  query, build the case database, mine, write one JSON object per
  pattern to the output file (JSON Lines), and print a run report as
  JSON on stdout.
* ``synth`` writes a synthetic cohort with a planted pattern, for demos
  and tests.

Exit codes: 0 success, 1 usage or query error, 2 data error, 3 the
search hit a resource budget and the results are incomplete (they are
still written). Diagnostics go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

from .builder import build_database
from .engine import MiningOptions, MiningResult, mine
from .errors import InvalidPlantSpec, ParseError, PathmineError, QueryError
from .ingest import load_deliveries, load_diseases, load_kb, RawDatabase
from .model import PatternTuple
from .query import compile_query, parse_query
from .synth import CohortConfig, PlantSpec, generate_cohort, write_cohort

USAGE_EXIT = 1
DATA_EXIT = 2
INCOMPLETE_EXIT = 3


@dataclass(frozen=True)
class RunReport:
    """Summary printed to stdout after a mine run."""

    patients_total: int
    patients_with_index: int
    deliveries_loaded: int
    diseases_loaded: int
    pattern_count: int
    complete: bool
    nodes_expanded: int
    wall_seconds: float
    config: dict


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def pattern_record(pt: PatternTuple) -> dict:
    """JSON-ready view of one mined pattern."""
    discr = None
    if pt.discriminative is not None:
        discr = sorted(pt.discriminative)
    return {
        "items": [list(item.values) for item in pt.pattern.items],
        "positive_support": len(pt.supported),
        "discriminative_support": discr,
        "embeddings": {
            patient: sorted(list(emb) for emb in embs)
            for patient, embs in pt.embeddings.items()
        },
    }


def render_patterns(patterns: tuple[PatternTuple, ...]) -> str:
    """JSON Lines text for a whole result, one pattern per line."""
    return "".join(
        json.dumps(pattern_record(pt), sort_keys=True, separators=(",", ":")) + "\n"
        for pt in patterns
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="pathmine", description="Constraint-based care-pathway pattern mining")
    sub = parser.add_subparsers(dest="command", required=True)

    mine_cmd = sub.add_parser("mine", help="run a mining query end to end")
    mine_cmd.add_argument("--query", required=True, help="query file (.pmq)")
    mine_cmd.add_argument("--deliveries", required=True, help="deliveries CSV")
    mine_cmd.add_argument("--diseases", required=True, help="diseases CSV")
    mine_cmd.add_argument("--kb", required=True, help="code attributes CSV")
    mine_cmd.add_argument("--taxonomy", required=True, help="taxonomy CSV")
    mine_cmd.add_argument("--out", required=True, help="output JSONL file")
    mine_cmd.add_argument(
        "--embeddings", choices=("all", "witness"), default="witness",
        help="store every embedding or one leftmost witness per patient",
    )
    mine_cmd.add_argument("--max-len", type=int, default=None, help="pattern length cap")
    mine_cmd.add_argument("--threads", type=int, default=1, help="search worker threads")
    mine_cmd.add_argument(
        "--unknown-code", choices=("skip", "abort"), default="abort",
        help="what to do with delivery codes missing from the KB",
    )
    mine_cmd.add_argument("--max-nodes", type=int, default=None, help="search node budget")
    mine_cmd.add_argument(
        "--max-seconds", type=float, default=None, help="search wall-clock budget"
    )
    mine_cmd.add_argument(
        "--class-filter-exact", action="store_true",
        help="match the class filter exactly instead of by taxonomy descent",
    )

    synth_cmd = sub.add_parser("synth", help="generate a synthetic cohort")
    synth_cmd.add_argument("--patients", required=True, type=int, help="cohort size")
    synth_cmd.add_argument(
        "--plant", default=None,
        help="pattern to plant: ATC,GROUP,FLAG|...@COUNT",
    )
    synth_cmd.add_argument("--seed", required=True, type=int, help="RNG seed")
    synth_cmd.add_argument("--out-dir", required=True, help="directory for the CSV files")
    synth_cmd.add_argument(
        "--mean-events", type=float, default=6.0, help="mean noise deliveries per window"
    )
    synth_cmd.add_argument(
        "--noise-items", type=int, default=16, help="size of the noise item roster"
    )
    return parser


def run_mine(args: argparse.Namespace) -> int:
    started = time.monotonic()
    try:
        with open(args.query, encoding="utf-8") as handle:
            query_text = handle.read()
    except OSError as exc:
        print(f"error: cannot read query: {exc}", file=sys.stderr)
        return USAGE_EXIT
    ast = parse_query(query_text)

    kb = load_kb(args.kb, args.taxonomy)
    task = compile_query(ast, kb, exact_class_match=args.class_filter_exact)
    raw = RawDatabase(load_deliveries(args.deliveries), load_diseases(args.diseases))
    database = build_database(raw, task, kb, unknown_code=args.unknown_code)

    options = MiningOptions(
        embeddings=args.embeddings,
        max_len=args.max_len,
        threads=args.threads,
        max_nodes=args.max_nodes,
        max_seconds=args.max_seconds,
    )
    result = mine(task, database, options)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(render_patterns(result.patterns))

    report = RunReport(
        patients_total=len(raw.patients()),
        patients_with_index=len(database),
        deliveries_loaded=len(raw.deliveries),
        diseases_loaded=len(raw.diseases),
        pattern_count=len(result.patterns),
        complete=result.complete,
        nodes_expanded=result.nodes_expanded,
        wall_seconds=round(time.monotonic() - started, 3),
        config={
            "query": args.query,
            "deliveries": args.deliveries,
            "diseases": args.diseases,
            "kb": args.kb,
            "taxonomy": args.taxonomy,
            "out": args.out,
            "embeddings": args.embeddings,
            "max_len": args.max_len,
            "threads": args.threads,
            "unknown_code": args.unknown_code,
            "max_nodes": args.max_nodes,
            "max_seconds": args.max_seconds,
            "class_filter_exact": args.class_filter_exact,
            "min_support": task.min_support,
        },
    )
    print(json.dumps(asdict(report), sort_keys=True, indent=2))
    if not result.complete:
        print("warning: resource budget exhausted, results are incomplete", file=sys.stderr)
        return INCOMPLETE_EXIT
    return 0


def run_synth(args: argparse.Namespace) -> int:
    plant = PlantSpec.parse(args.plant) if args.plant else None
    config = CohortConfig(
        patients=args.patients,
        seed=args.seed,
        plant=plant,
        mean_events=args.mean_events,
        noise_items=args.noise_items,
    )
    cohort = generate_cohort(config)
    paths = write_cohort(cohort, args.out_dir)
    print(
        json.dumps(
            {
                "patients": config.patients,
                "planted_patients": len(cohort.planted_patients),
                "deliveries": len(cohort.deliveries),
                "diseases": len(cohort.diseases),
                "files": paths,
                "seed": config.seed,
            },
            sort_keys=True,
            indent=2,
        )
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        if args.command == "mine":
            return run_mine(args)
        return run_synth(args)
    except (QueryError, InvalidPlantSpec) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except PathmineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
