"""Synthetic corpora, similarity planting, and the three benchmark
experiments (self-recall, disjoint-corpora, planted-evidence).

Real-world reference datasets are not redistributable, so every experiment
runs on seeded synthetic corpora: generation is fully deterministic given the
seed, and similarity ground truth comes from ``compare_digests`` itself.
"""

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .digest import all_against_all, compare_digests, make_digest
from .errors import ConfigError, PlantingError
from .tree import DEFAULT_MIN_RUN, HbftIndex, TreeConfig

DEFAULT_THRESHOLD = 20

_SHARED_BLOCK = 2048
_SHARED_POOL = 64
_MUTATION_BLOCK = 512


@dataclass
class CorpusSpec:
    seed: int
    file_count: int
    size_min: int = 4 * 1024
    size_max: int = 64 * 1024
    model: str = "pseudorandom"  # or "mixed-redundancy"

    def validate(self) -> None:
        if self.size_min < 1 or self.size_max < self.size_min:
            raise ConfigError("invalid size bounds")
        if self.file_count < 0:
            raise ConfigError("file_count must be >= 0")
        if self.model not in ("pseudorandom", "mixed-redundancy"):
            raise ConfigError(f"unknown content model {self.model!r}")


def generate_corpus(spec: CorpusSpec, out_dir) -> list:
    """Write ``spec.file_count`` deterministic files; returns sorted paths."""
    spec.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shared = None
    if spec.model == "mixed-redundancy":
        pool_rng = np.random.default_rng([spec.seed, 2**32])
        shared = [pool_rng.bytes(_SHARED_BLOCK) for _ in range(_SHARED_POOL)]
    paths = []
    for i in range(spec.file_count):
        rng = np.random.default_rng([spec.seed, i])
        size = int(rng.integers(spec.size_min, spec.size_max + 1))
        if shared is None:
            data = rng.bytes(size)
        else:
            # Interleave shared blocks to create natural cross-file overlap.
            parts = []
            remaining = size
            while remaining > 0:
                take = min(_SHARED_BLOCK, remaining)
                if rng.random() < 0.3:
                    parts.append(shared[int(rng.integers(_SHARED_POOL))][:take])
                else:
                    parts.append(rng.bytes(take))
                remaining -= take
            data = b"".join(parts)
        path = out_dir / f"file{i:05d}.bin"
        path.write_bytes(data)
        paths.append(path)
    return paths


def plant_similar(base: bytes, target_band, seed: int,
                  max_iterations: int = 30):
    """Mutate ``base`` until its digest score lands in ``target_band``.

    Replaces aligned 512-byte blocks with seeded random bytes, bisecting on
    the replacement rate against the ``compare_digests`` oracle.  Returns
    (mutant bytes, achieved score).
    """
    low, high = target_band
    if not 0 <= low <= high <= 100:
        raise ConfigError(f"invalid band {target_band}")
    if len(base) < 1024:
        raise ConfigError("base file must be at least 1 KiB")
    if low == 100:
        return base, 100
    base_digest = make_digest("base", base)
    nblocks = math.ceil(len(base) / _MUTATION_BLOCK)

    def mutate(rate):
        k = min(nblocks, max(1, round(rate * nblocks)))
        rng = np.random.default_rng([seed, k])
        picks = rng.choice(nblocks, size=k, replace=False)
        buf = bytearray(base)
        for bi in sorted(int(p) for p in picks):
            start = bi * _MUTATION_BLOCK
            end = min(start + _MUTATION_BLOCK, len(buf))
            buf[start:end] = rng.bytes(end - start)
        return bytes(buf)

    lo_rate, hi_rate = 0.0, 1.0
    for _ in range(max_iterations):
        mid = (lo_rate + hi_rate) / 2
        mutant = mutate(mid)
        score = compare_digests(base_digest, make_digest("mutant", mutant))
        if score > high:
            lo_rate = mid      # too similar still: mutate harder
        elif score < low:
            hi_rate = mid
        else:
            return mutant, score
    raise PlantingError(
        f"could not reach band {target_band} within {max_iterations} iterations")


@dataclass
class PlantRecord:
    disk_name: str
    source_id: str
    kind: str          # "identical" or "similar"
    band: str          # e.g. "80-100"; "identical" plants use "100-100"
    planted_score: int


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    build_time: float = 0.0
    search_time: float = 0.0
    baseline_comparisons: int = 0
    tree_comparisons: int = 0
    recall: float | None = None
    similar_recall: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def csv_rows(self):
        rows = [
            (self.experiment, "build_time", self.build_time),
            (self.experiment, "search_time", self.search_time),
            (self.experiment, "baseline_comparisons", self.baseline_comparisons),
            (self.experiment, "tree_comparisons", self.tree_comparisons),
        ]
        if self.recall is not None:
            rows.append((self.experiment, "recall", self.recall))
        for band, value in self.similar_recall.items():
            rows.append((self.experiment, f"similar_recall_{band}", value))
        for key, value in self.extras.items():
            if isinstance(value, (int, float)):
                rows.append((self.experiment, key, value))
        return rows


def write_csv(path, reports) -> None:
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(["experiment", "metric", "value"])
        for report in reports:
            writer.writerows(report.csv_rows())


def digest_directory(directory, workers: int | None = None, **params):
    """Digest every regular file, in lexicographic path order."""
    paths = sorted(p for p in Path(directory).iterdir() if p.is_file())

    def one(path):
        return make_digest(path.name, path.read_bytes(), **params)

    if workers is None or workers <= 1 or len(paths) < 2:
        return [one(p) for p in paths]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, paths))


def build_index(digests, cfg: TreeConfig):
    """Build and finalize an index over ``digests``; returns (index, seconds)."""
    start = time.perf_counter()
    idx = HbftIndex(cfg)
    for d in digests:
        idx.insert_file(d)
    idx.finalize()
    return idx, time.perf_counter() - start


def _tree_config(mode, budget, leaves, min_run):
    return TreeConfig(mode=mode, memory_budget_bytes=budget,
                      leaf_count=leaves, min_run=min_run)


def run_self_recall(corpus_dir, min_run_values=(DEFAULT_MIN_RUN,),
                    mode="variable", budget=64 * 2**20, leaves=None,
                    threshold=DEFAULT_THRESHOLD, workers=None):
    """Index a corpus and search every file for itself, once per min_run."""
    digests = digest_directory(corpus_dir, workers=workers)
    if leaves is None:
        leaves = len(digests)
    cfg = _tree_config(mode, budget, leaves, min(min_run_values))
    idx, build_time = build_index(digests, cfg)
    reports = []
    for min_run in min_run_values:
        start = time.perf_counter()
        results = idx.search_many(digests, threshold, min_run, workers)
        search_time = time.perf_counter() - start
        found = sum(1 for d, r in zip(digests, results)
                    if idx.leaf_of[d.file_id] in r.leaves_reached)
        reports.append(ExperimentReport(
            experiment="self-recall",
            config={"mode": mode, "budget": budget, "leaves": leaves,
                    "min_run": min_run, "threshold": threshold,
                    "files": len(digests)},
            build_time=build_time,
            search_time=search_time,
            baseline_comparisons=len(digests) ** 2,
            tree_comparisons=sum(r.pairwise_comparisons for r in results),
            recall=found / len(digests) if digests else 1.0,
        ))
    return reports


def run_disjoint(tree_dir, query_dir, mode="variable", budget=64 * 2**20,
                 leaves=None, min_run=DEFAULT_MIN_RUN,
                 threshold=DEFAULT_THRESHOLD, workers=None):
    """Build a tree over one corpus and search the files of the other."""
    tree_digests = digest_directory(tree_dir, workers=workers)
    query_digests = digest_directory(query_dir, workers=workers)
    if leaves is None:
        leaves = len(tree_digests)
    cfg = _tree_config(mode, budget, leaves, min_run)
    idx, build_time = build_index(tree_digests, cfg)
    start = time.perf_counter()
    results = idx.search_many(query_digests, threshold, min_run, workers)
    search_time = time.perf_counter() - start
    return ExperimentReport(
        experiment="disjoint",
        config={"mode": mode, "budget": budget, "leaves": leaves,
                "min_run": min_run, "threshold": threshold,
                "tree_files": len(tree_digests),
                "query_files": len(query_digests)},
        build_time=build_time,
        search_time=search_time,
        baseline_comparisons=len(tree_digests) * len(query_digests),
        tree_comparisons=sum(r.pairwise_comparisons for r in results),
    )


def prepare_planted(illegal_dir, disk_dir, seed, identical_count,
                    similar_bands, min_source_size=16 * 1024):
    """Copy/mutate reference files into the disk corpus; returns the manifest.

    ``similar_bands`` is a list of (low, high, count).  Sources are taken from
    the reference corpus in path order, preferring files large enough for
    fine-grained mutation, and each source is used at most once.
    """
    illegal_dir = Path(illegal_dir)
    disk_dir = Path(disk_dir)
    disk_dir.mkdir(parents=True, exist_ok=True)
    candidates = sorted(p for p in illegal_dir.iterdir() if p.is_file())
    big = [p for p in candidates if p.stat().st_size >= min_source_size]
    small = [p for p in candidates if p.stat().st_size < min_source_size]
    queue = big + small
    needed = identical_count + sum(count for _, _, count in similar_bands)
    if len(queue) < needed:
        raise ConfigError("not enough reference files to plant from")
    manifest = []
    cursor = 0
    for i in range(identical_count):
        src = queue[cursor]
        cursor += 1
        name = f"plant_identical_{i:04d}.bin"
        (disk_dir / name).write_bytes(src.read_bytes())
        manifest.append(PlantRecord(name, src.name, "identical", "100-100", 100))
    for low, high, count in similar_bands:
        for i in range(count):
            # Bisection can skip a narrow band for an unlucky mutation seed;
            # retry with fresh seeds before declaring the band unreachable.
            mutant = None
            for attempt in range(8):
                src = queue[cursor]
                if attempt == 0:
                    cursor += 1
                try:
                    mutant, score = plant_similar(
                        src.read_bytes(), (low, high),
                        seed + cursor + attempt * 10007)
                    break
                except PlantingError:
                    continue
            if mutant is None:
                raise PlantingError(
                    f"could not plant a file in band {low}-{high}")
            name = f"plant_{low:03d}_{high:03d}_{i:04d}.bin"
            (disk_dir / name).write_bytes(mutant)
            manifest.append(PlantRecord(name, src.name, "similar",
                                        f"{low}-{high}", score))
    return manifest


def run_planted(illegal_dir, disk_dir, manifest, mode="variable",
                budget=64 * 2**20, leaves=None, min_run=DEFAULT_MIN_RUN,
                threshold=DEFAULT_THRESHOLD, workers=None,
                measure_baseline=True):
    """Tree over the reference corpus, search every disk file.

    A plant counts as found when the search for its disk file reaches the
    leaf caching its source digest.
    """
    illegal_digests = digest_directory(illegal_dir, workers=workers)
    disk_digests = digest_directory(disk_dir, workers=workers)
    if leaves is None:
        leaves = len(illegal_digests)
    cfg = _tree_config(mode, budget, leaves, min_run)
    idx, build_time = build_index(illegal_digests, cfg)
    start = time.perf_counter()
    results = idx.search_many(disk_digests, threshold, min_run, workers)
    search_time = time.perf_counter() - start
    by_name = {d.file_id: r for d, r in zip(disk_digests, results)}

    def found(record: PlantRecord) -> bool:
        report = by_name[record.disk_name]
        return idx.leaf_of[record.source_id] in report.leaves_reached

    identical = [r for r in manifest if r.kind == "identical"]
    recall = (sum(1 for r in identical if found(r)) / len(identical)
              if identical else None)
    similar_recall = {}
    for band in sorted({r.band for r in manifest if r.kind == "similar"}):
        members = [r for r in manifest if r.kind == "similar" and r.band == band]
        similar_recall[band] = sum(1 for r in members if found(r)) / len(members)

    extras = {"tree_time": build_time + search_time}
    if measure_baseline:
        start = time.perf_counter()
        _, baseline_count = all_against_all(disk_digests, illegal_digests,
                                            threshold)
        extras["baseline_time"] = time.perf_counter() - start
    else:
        baseline_count = len(disk_digests) * len(illegal_digests)
    return ExperimentReport(
        experiment="planted",
        config={"mode": mode, "budget": budget, "leaves": leaves,
                "min_run": min_run, "threshold": threshold,
                "illegal_files": len(illegal_digests),
                "disk_files": len(disk_digests),
                "plants": len(manifest)},
        build_time=build_time,
        search_time=search_time,
        baseline_comparisons=baseline_count,
        tree_comparisons=sum(r.pairwise_comparisons for r in results),
        recall=recall,
        similar_recall=similar_recall,
        extras=extras,
    )
