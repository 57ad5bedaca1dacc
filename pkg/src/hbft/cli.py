"""Command-line entry point: hash, compare, build, search, and bench."""

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from .digest import (DEFAULT_BLOCK_SIZE, DEFAULT_FILTER_BYTES,
                     DEFAULT_FILTER_CAPACITY, compare_digests, make_digest,
                     read_digest, write_digest)
from .errors import ConfigError, FormatError, HbftError, PlantingError
from .harness import (DEFAULT_THRESHOLD, CorpusSpec, ExperimentReport,
                      generate_corpus, prepare_planted, run_disjoint,
                      run_planted, run_self_recall, write_csv)
from .tree import DEFAULT_BUDGET, DEFAULT_MIN_RUN, HbftIndex, TreeConfig

EXIT_OK = 0
EXIT_NO_MATCHES = 1
EXIT_USAGE = 2
EXIT_IO = 3

FORMAT_VERSION = 1


def _add_digest_flags(parser):
    parser.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE,
                        help="target mean chunk size in bytes (default: %(default)s)")
    parser.add_argument("--filter-bytes", type=int, default=DEFAULT_FILTER_BYTES,
                        help="digest Bloom filter size in bytes (default: %(default)s)")
    parser.add_argument("--filter-capacity", type=int, default=DEFAULT_FILTER_CAPACITY,
                        help="chunks per digest filter (default: %(default)s)")


def _add_worker_flag(parser):
    parser.add_argument("--workers", type=int, default=os.cpu_count(),
                        help="worker threads (default: %(default)s)")


def _digest_params(args):
    return {"block_size": args.block_size, "filter_bytes": args.filter_bytes,
            "filter_capacity": args.filter_capacity}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbft",
        description="Bloom-filter similarity digests with a hierarchical "
                    "Bloom filter tree index.")
    parser.add_argument("--version", action="version",
                        version=f"hbft {__version__} (format v{FORMAT_VERSION}, "
                                f"{BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hash", help="write the similarity digest of a file")
    p.add_argument("path", type=Path)
    p.add_argument("-o", "--out", type=Path,
                   help="output path (default: <path>.sd)")
    _add_digest_flags(p)

    p = sub.add_parser("compare", help="score two digest files (0-100)")
    p.add_argument("digest_a", type=Path)
    p.add_argument("digest_b", type=Path)

    p = sub.add_parser("build", help="index a corpus directory")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--mode", choices=["variable", "fixed"], default="variable",
                   help="tree width mode (default: %(default)s)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="tree memory budget in bytes (default: %(default)s)")
    p.add_argument("--leaves", type=int,
                   help="leaf count (default: one per file)")
    p.add_argument("--min-run", type=int, default=DEFAULT_MIN_RUN,
                   help="default consecutive-hash run for matching "
                        "(default: %(default)s)")
    _add_digest_flags(p)
    _add_worker_flag(p)

    p = sub.add_parser("search", help="search files against an index")
    p.add_argument("query", type=Path, help="query file or directory")
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("--min-run", type=int,
                   help="consecutive-hash run for matching (default: index setting)")
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD,
                   help="minimum reported score (default: %(default)s)")
    p.add_argument("--fail-on-empty", action="store_true",
                   help="exit 1 when no matches are found")
    _add_digest_flags(p)
    _add_worker_flag(p)

    p = sub.add_parser("bench", help="run a benchmark experiment")
    p.add_argument("experiment",
                   choices=["self-recall", "disjoint", "planted"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=Path, required=True, help="JSON report path")
    p.add_argument("--csv", type=Path, help="also write a flat CSV")
    p.add_argument("--workdir", type=Path, required=True,
                   help="directory for generated corpora")
    p.add_argument("--files", type=int, default=2000,
                   help="reference corpus size (default: %(default)s)")
    p.add_argument("--size-min", type=int, default=4 * 1024)
    p.add_argument("--size-max", type=int, default=64 * 1024)
    p.add_argument("--mode", choices=["variable", "fixed"], default="variable")
    p.add_argument("--budget", type=int, default=64 * 2**20,
                   help="tree memory budget in bytes (default: %(default)s)")
    p.add_argument("--leaves", type=int,
                   help="leaf count (default: one per file)")
    p.add_argument("--min-run", type=int, default=DEFAULT_MIN_RUN)
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    _add_worker_flag(p)
    return parser


def cmd_hash(args) -> int:
    data = args.path.read_bytes()
    digest = make_digest(args.path.name, data, **_digest_params(args))
    out = args.out or args.path.with_name(args.path.name + ".sd")
    out.write_bytes(write_digest(digest))
    print(out)
    return EXIT_OK


def cmd_compare(args) -> int:
    a = read_digest(args.digest_a.read_bytes())
    b = read_digest(args.digest_b.read_bytes())
    print(compare_digests(a, b))
    return EXIT_OK


def _ingest_paths(root: Path):
    if root.is_dir():
        return sorted(p for p in root.iterdir() if p.is_file())
    return [root]


def cmd_build(args) -> int:
    paths = _ingest_paths(args.corpus)
    if not paths:
        raise ConfigError(f"no files under {args.corpus}")
    params = _digest_params(args)
    digests = [make_digest(p.name, p.read_bytes(), **params) for p in paths]
    leaves = args.leaves if args.leaves is not None else len(digests)
    cfg = TreeConfig(mode=args.mode, memory_budget_bytes=args.budget,
                     leaf_count=leaves, min_run=args.min_run)
    idx = HbftIndex(cfg)
    for d in digests:
        idx.insert_file(d)
    idx.finalize()
    idx.save(args.out)
    print(f"indexed {len(digests)} files into {idx.leaf_count} leaves "
          f"({args.mode}, root {idx.layout.root_size_bytes} bytes) -> {args.out}")
    return EXIT_OK


def cmd_search(args) -> int:
    idx = HbftIndex.load(args.index)
    params = _digest_params(args)
    queries = [make_digest(p.name, p.read_bytes(), **params)
               for p in _ingest_paths(args.query)]
    results = idx.search_many(queries, args.threshold, args.min_run,
                              args.workers)
    lines = []
    nodes_probed = 0
    comparisons = 0
    for q, r in zip(queries, results):
        nodes_probed += r.nodes_probed
        comparisons += r.pairwise_comparisons
        for match_id, score in r.scores:
            lines.append((q.file_id, match_id, score))
    for query_id, match_id, score in sorted(lines):
        print(f"{query_id}\t{match_id}\t{score}")
    print(f"# queries: {len(queries)}", file=sys.stderr)
    print(f"# nodes_probed: {nodes_probed}", file=sys.stderr)
    print(f"# pairwise_comparisons: {comparisons}", file=sys.stderr)
    print(f"# matches: {len(lines)}", file=sys.stderr)
    if args.fail_on_empty and not lines:
        return EXIT_NO_MATCHES
    return EXIT_OK


def cmd_bench(args) -> int:
    workdir = args.workdir
    workdir.mkdir(parents=True, exist_ok=True)
    common = {"mode": args.mode, "budget": args.budget, "leaves": args.leaves,
              "threshold": args.threshold, "workers": args.workers}
    if args.experiment == "self-recall":
        corpus = workdir / "corpus"
        generate_corpus(CorpusSpec(args.seed, args.files, args.size_min,
                                   args.size_max), corpus)
        reports = run_self_recall(corpus, min_run_values=(args.min_run,),
                                  **common)
    elif args.experiment == "disjoint":
        dir_a = workdir / "corpus_a"
        dir_b = workdir / "corpus_b"
        generate_corpus(CorpusSpec(args.seed, args.files, args.size_min,
                                   args.size_max), dir_a)
        generate_corpus(CorpusSpec(args.seed + 1, args.files, args.size_min,
                                   args.size_max), dir_b)
        forward = run_disjoint(dir_a, dir_b, min_run=args.min_run, **common)
        forward.experiment = "disjoint-tree-a"
        reverse = run_disjoint(dir_b, dir_a, min_run=args.min_run, **common)
        reverse.experiment = "disjoint-tree-b"
        faster = ("tree-a" if forward.build_time + forward.search_time
                  <= reverse.build_time + reverse.search_time else "tree-b")
        forward.extras["faster_direction"] = faster
        reports = [forward, reverse]
    else:
        illegal = workdir / "illegal"
        disk = workdir / "disk"
        generate_corpus(CorpusSpec(args.seed, args.files, args.size_min,
                                   args.size_max), illegal)
        generate_corpus(CorpusSpec(args.seed + 1, 3 * args.files,
                                   args.size_min, args.size_max), disk)
        per_band = min(10, max(1, args.files // 40))
        manifest = prepare_planted(illegal, disk, args.seed + 2,
                                   identical_count=max(1, args.files // 20),
                                   similar_bands=[(80, 100, per_band),
                                                  (60, 79, per_band),
                                                  (40, 59, per_band),
                                                  (20, 39, per_band)])
        reports = [run_planted(illegal, disk, manifest, min_run=args.min_run,
                               **common)]
    doc = {"seed": args.seed, "backend": BACKEND,
           "reports": [r.to_dict() for r in reports]}
    args.out.write_text(json.dumps(doc, indent=2) + "\n")
    if args.csv:
        write_csv(args.csv, reports)
    print(args.out)
    return EXIT_OK


_COMMANDS = {
    "hash": cmd_hash,
    "compare": cmd_compare,
    "build": cmd_build,
    "search": cmd_search,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, PlantingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HbftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
