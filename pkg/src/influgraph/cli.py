"""Command-line entry point: ``influgraph {ingest,stats,rank,communities,export}``.

Exit codes: 0 success, 1 usage error, 2 input error, 3 analysis error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import snapshot
from .community import MemeticConfig, detect_communities
from .export import communities_csv, read_communities_csv, write_dot, write_edge_csv, write_gexf
from .graph import GraphError, InteractionGraph, VertexKind, undirected_view, user_projection
from .ingest import RecordError, build_graph, capture_stats, read_records, read_seeds
from .metrics import (
    DegenerateGraphError,
    UndefinedModularityError,
    importance_core,
    importance_scores,
    rank_csv,
    rank_users,
)

log = logging.getLogger("influgraph")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_ANALYSIS = 0, 1, 2, 3
DEFAULT_SEED = 20181028
MAX_BAD_LINE_FRACTION = 0.10
SNAPSHOT_NAME = "graph.igz"


class InputError(Exception):
    pass


class AnalysisError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse's default exit status is 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _write_text(text: str, out_dir: Path | None, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_graph(path: Path) -> InteractionGraph:
    try:
        return snapshot.load(path)
    except OSError as exc:
        raise InputError(f"cannot read snapshot {path}: {exc.strerror}") from None
    except (snapshot.SnapshotError, GraphError, ValueError, KeyError) as exc:
        raise InputError(f"invalid snapshot {path}: {exc}") from None


def _stats_csv(g: InteractionGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    writer.writerows(capture_stats(g).rows())
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------------


def cmd_ingest(args) -> int:
    try:
        with open(args.seeds, encoding="utf-8") as fh:
            seeds = read_seeds(fh)
    except OSError as exc:
        raise InputError(f"cannot read seeds file {args.seeds}: {exc.strerror}") from None
    if not seeds:
        raise InputError(f"seed list {args.seeds} is empty")

    errors: list[RecordError] = []
    n_lines = 0

    def counted(fh):
        nonlocal n_lines
        for line in fh:
            if line.strip():
                n_lines += 1
            yield line

    try:
        with open(args.records, encoding="utf-8") as fh:
            g = build_graph(read_records(counted(fh), errors), seeds)
    except OSError as exc:
        raise InputError(f"cannot read records file {args.records}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"records file {args.records} is not valid UTF-8: {exc}") from None

    if n_lines == 0:
        log.warning("records file %s is empty", args.records)
    if errors:
        log.warning("%d of %d lines failed to parse", len(errors), n_lines)
    if n_lines and len(errors) / n_lines > MAX_BAD_LINE_FRACTION:
        raise InputError(f"{len(errors)} of {n_lines} lines failed to parse (more than 10%)")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snapshot.save(g, out / SNAPSHOT_NAME)
    _write_text(_stats_csv(g), out, "stats.csv")
    log.info("wrote %s (%d vertices, %d edges)", out / SNAPSHOT_NAME, g.n_vertices, g.n_edges)
    return EXIT_OK


def cmd_stats(args) -> int:
    g = _load_graph(args.graph)
    _write_text(_stats_csv(g), Path(args.out) if args.out else None, "stats.csv")
    return EXIT_OK


def cmd_rank(args) -> int:
    g = _load_graph(args.graph)
    if not g.profiles:
        raise AnalysisError("graph has no User vertices")
    rows = rank_users(g, by=args.by, top=args.top, inorm_divisor=args.inorm_divisor)
    _write_text(rank_csv(rows), Path(args.out) if args.out else None, f"rank_{args.by}.csv")
    return EXIT_OK


def _memetic_config(args) -> MemeticConfig:
    try:
        return MemeticConfig(
            population_size=args.population,
            max_generations=args.generations,
            stagnation_limit=args.stagnation,
            crossover_rate=args.crossover_rate,
            mutation_rate=args.mutation_rate,
            local_search_sweeps=args.sweeps,
            elite_count=args.elite,
            rng_seed=args.seed,
        )
    except ValueError as exc:
        raise InputError(f"invalid solver configuration: {exc}") from None


def _analysis_graph(g: InteractionGraph, top_core: int | None, divisor: int) -> InteractionGraph:
    proj = user_projection(g)
    # a core at least as large as the projection is the projection itself
    if top_core is None or top_core >= proj.n_vertices:
        return proj
    return importance_core(g, top_core, divisor)


def cmd_communities(args) -> int:
    g = _load_graph(args.graph)
    cfg = _memetic_config(args)
    try:
        target = _analysis_graph(g, args.top_core, args.inorm_divisor)
        result = detect_communities(undirected_view(target), cfg, workers=args.workers)
    except (UndefinedModularityError, GraphError) as exc:
        raise AnalysisError(str(exc)) from None
    summary = f"Q={result.q:.6f} communities={result.community_count} generations={result.generations_run}"
    sizes = " ".join(str(s) for s in result.community_sizes)
    out = Path(args.out)
    _write_text(communities_csv(target, result.partition.labels), out, "communities.csv")
    _write_text(f"{summary}\nsizes={sizes}\nevaluations={result.evaluations}\n", out, "summary.txt")
    print(summary)
    return EXIT_OK


def cmd_export(args) -> int:
    g = _load_graph(args.graph)
    try:
        if args.view == "full":
            target = g
        elif args.view == "projection":
            target = user_projection(g)
        else:
            target = importance_core(g, args.top_core, args.inorm_divisor)
    except GraphError as exc:
        raise AnalysisError(str(exc)) from None

    communities = None
    if args.with_communities:
        try:
            with open(args.with_communities, encoding="utf-8") as fh:
                communities = read_communities_csv(target, fh)
        except OSError as exc:
            raise InputError(f"cannot read {args.with_communities}: {exc.strerror}") from None
        except (GraphError, ValueError, KeyError) as exc:
            raise InputError(str(exc)) from None

    scores = importance_scores(g, args.inorm_divisor) if g.profiles else {}
    importance = {}
    for v in range(target.n_vertices):
        if target.kinds[v] is VertexKind.USER:
            gv = g.vertex_id(VertexKind.USER, target.keys[v])
            importance[v] = scores[gv].importance

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"graph.{args.format}"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if args.format == "gexf":
            write_gexf(target, fh, communities, importance)
        elif args.format == "dot":
            write_dot(target, fh, communities, importance)
        else:
            write_edge_csv(target, fh)
    log.info("wrote %s", path)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="influgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="build a graph snapshot from JSON-lines records")
    p.add_argument("--records", required=True, type=Path)
    p.add_argument("--seeds", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="per-kind vertex counts of a snapshot")
    p.add_argument("--graph", required=True, type=Path)
    p.add_argument("--out", type=Path, help="directory for stats.csv (default: stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("rank", help="user ranking table by degree or importance")
    p.add_argument("--graph", required=True, type=Path)
    p.add_argument("--by", choices=("degree", "importance"), default="importance")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--inorm-divisor", type=int, choices=(1, 2), default=2)
    p.add_argument("--out", type=Path, help="directory for rank_<by>.csv (default: stdout)")
    p.set_defaults(func=cmd_rank)

    defaults = MemeticConfig()
    p = sub.add_parser("communities", help="memetic community detection on the user projection")
    p.add_argument("--graph", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--top-core", type=_positive, help="restrict to the connected core of the N most important users")
    p.add_argument("--seed", type=_u64, default=DEFAULT_SEED)
    p.add_argument("--inorm-divisor", type=int, choices=(1, 2), default=2)
    p.add_argument("--population", type=int, default=defaults.population_size)
    p.add_argument("--generations", type=int, default=defaults.max_generations)
    p.add_argument("--stagnation", type=int, default=defaults.stagnation_limit)
    p.add_argument("--crossover-rate", type=float, default=defaults.crossover_rate)
    p.add_argument("--mutation-rate", type=float, default=defaults.mutation_rate)
    p.add_argument("--sweeps", type=int, default=defaults.local_search_sweeps)
    p.add_argument("--elite", type=int, default=defaults.elite_count)
    p.add_argument("--workers", type=_positive, default=1, help="threads for offspring evaluation")
    p.set_defaults(func=cmd_communities)

    p = sub.add_parser("export", help="write the graph as GEXF, DOT or an edge-list CSV")
    p.add_argument("--graph", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", choices=("gexf", "dot", "csv"), default="gexf")
    p.add_argument("--view", choices=("full", "projection", "core"), default="projection")
    p.add_argument("--top-core", type=_positive, default=1000)
    p.add_argument("--with-communities", type=Path)
    p.add_argument("--size-by", choices=("importance",), default="importance")
    p.add_argument("--inorm-divisor", type=int, choices=(1, 2), default=2)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (AnalysisError, DegenerateGraphError) as exc:
        log.error("%s", exc)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
