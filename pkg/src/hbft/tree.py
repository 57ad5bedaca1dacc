"""Hierarchical Bloom filter tree: layout planning under a memory budget,
construction in both widths, consecutive-run search, and leaf rescoring.

The tree is a complete binary tree stored heap-style (node ``i`` has children
``2i+1`` and ``2i+2``); with ``n`` leaves there are ``2n - 1`` nodes and the
leaves are the last ``n`` heap slots.  Variable-width trees give every level
the same total memory, so each node is half its parent's size; fixed-width
trees use one size everywhere and are built leaves-first, then OR-merged
upward.
"""

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bloom import MIN_SIZE_BYTES, BloomFilter
from .digest import SimilarityDigest, compare_digests, read_digest_from, write_digest
from .errors import BudgetError, ConfigError, FormatError, HbftError

DEFAULT_MIN_RUN = 4
DEFAULT_BUDGET = 10 * 2**30  # 10 GiB

_MAGIC = b"HBFT-IX\0"
_VERSION = 1
_HEADER = struct.Struct("<8sIBQQIQ")
_MODES = {"variable": 0, "fixed": 1}
_MODE_NAMES = {v: k for k, v in _MODES.items()}


@dataclass
class TreeConfig:
    mode: str = "variable"
    memory_budget_bytes: int = DEFAULT_BUDGET
    leaf_count: int = 1
    min_run: int = DEFAULT_MIN_RUN

    def validate(self) -> None:
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be 'variable' or 'fixed', got {self.mode!r}")
        if self.leaf_count < 1:
            raise ConfigError("leaf_count must be >= 1")
        if self.memory_budget_bytes < 1:
            raise ConfigError("memory budget must be positive")
        if self.min_run < 1:
            raise ConfigError("min_run must be >= 1")


def _depth(node: int) -> int:
    return (node + 1).bit_length() - 1


@dataclass
class TreeLayout:
    mode: str
    leaf_count: int
    node_count: int
    root_size_bytes: int
    node_sizes: list = field(repr=False)

    def depth(self, node: int) -> int:
        return _depth(node)

    @property
    def max_depth(self) -> int:
        return _depth(self.node_count - 1)


def plan_layout(cfg: TreeConfig) -> TreeLayout:
    """Pick power-of-two node sizes that fit the memory budget.

    Variable width: the root gets ``2^floor(log2(u / (log2(n) + 1)))`` bytes
    and every node is half its parent.  Fixed width: every node gets
    ``2^floor(log2(u / (2n - 1)))`` bytes.
    """
    cfg.validate()
    n = cfg.leaf_count
    u = cfg.memory_budget_bytes
    node_count = 2 * n - 1
    max_depth = _depth(node_count - 1)
    if cfg.mode == "variable":
        per_level = u / (math.log2(n) + 1)
        if per_level < 1:
            raise BudgetError("budget too small for this leaf count")
        root = 1 << math.floor(math.log2(per_level))
        if root >> max_depth < MIN_SIZE_BYTES:
            raise BudgetError(
                f"budget gives {root >> max_depth}-byte leaves; "
                f"minimum is {MIN_SIZE_BYTES}")
        sizes = [root >> _depth(i) for i in range(node_count)]
    else:
        per_node = u / node_count
        if per_node < MIN_SIZE_BYTES:
            raise BudgetError("budget too small for this leaf count")
        root = 1 << math.floor(math.log2(per_node))
        sizes = [root] * node_count
    assert sum(sizes) <= u
    return TreeLayout(cfg.mode, n, node_count, root, sizes)


def node_matches(node: BloomFilter, hashes, min_run: int) -> bool:
    """True iff some ``min_run`` consecutive chunk hashes are all in ``node``."""
    if min_run < 1:
        raise ConfigError("min_run must be >= 1")
    return node.contains_run(hashes, min_run)


@dataclass
class SearchReport:
    query_id: str
    leaves_reached: list
    candidates: list
    scores: list  # (file_id, score) with score >= threshold
    nodes_probed: int
    pairwise_comparisons: int


class HbftIndex:
    """A planned tree plus per-leaf digest caches."""

    def __init__(self, cfg: TreeConfig):
        cfg.validate()
        self.config = cfg
        self.layout = plan_layout(cfg)
        self.nodes = [BloomFilter(s) for s in self.layout.node_sizes]
        self.leaf_files = [[] for _ in range(cfg.leaf_count)]
        self.leaf_of = {}
        self.assignment_cursor = 0
        self.finalized = cfg.mode == "variable"

    @property
    def leaf_count(self) -> int:
        return self.layout.leaf_count

    def leaf_node(self, leaf: int) -> int:
        return self.leaf_count - 1 + leaf

    def assign_leaf(self) -> int:
        leaf = self.assignment_cursor % self.leaf_count
        self.assignment_cursor += 1
        return leaf

    def insert_file(self, d: SimilarityDigest, leaf: int | None = None) -> int:
        """Insert a digest, round-robin by default.  Returns the leaf id."""
        if d.chunk_count < 1:
            raise ConfigError("digest has no chunk hashes")
        if leaf is None:
            leaf = self.assign_leaf()
        hashes = np.ascontiguousarray(d.hashes, np.uint64)
        node = self.leaf_node(leaf)
        if self.config.mode == "variable":
            while True:
                self.nodes[node].insert_many(hashes)
                if node == 0:
                    break
                node = (node - 1) // 2
        else:
            self.nodes[node].insert_many(hashes)
            self.finalized = False
        self.leaf_files[leaf].append(d)
        self.leaf_of[d.file_id] = leaf
        return leaf

    def finalize(self) -> None:
        """Fixed mode: OR children into parents bottom-up.  Idempotent; a
        no-op for variable-width trees."""
        if self.config.mode == "fixed":
            for node in range(self.layout.node_count - 1, 0, -1):
                self.nodes[(node - 1) // 2].merge_from(self.nodes[node])
        self.finalized = True

    def search(self, query: SimilarityDigest, threshold: int,
               min_run: int | None = None) -> SearchReport:
        """Depth-first descent from the root, rescoring at matched leaves."""
        if not self.finalized:
            raise HbftError("index must be finalized before searching")
        if min_run is None:
            min_run = self.config.min_run
        hashes = np.ascontiguousarray(query.hashes, np.uint64)
        first_leaf = self.leaf_count - 1
        leaves, candidates, scores = [], [], []
        nodes_probed = 0
        comparisons = 0
        stack = [0]
        while stack:
            node = stack.pop()
            nodes_probed += 1
            if not node_matches(self.nodes[node], hashes, min_run):
                continue
            if node >= first_leaf:
                leaf = node - first_leaf
                leaves.append(leaf)
                for d in self.leaf_files[leaf]:
                    score = compare_digests(query, d)
                    comparisons += 1
                    candidates.append(d.file_id)
                    if score >= threshold:
                        scores.append((d.file_id, score))
            else:
                # pop order: left child probed first
                stack.append(2 * node + 2)
                stack.append(2 * node + 1)
        return SearchReport(query.file_id, leaves, candidates, scores,
                            nodes_probed, comparisons)

    def search_many(self, queries, threshold: int,
                    min_run: int | None = None, workers: int | None = None):
        """Search several queries; results come back in query order."""
        if workers is None or workers <= 1 or len(queries) < 2:
            return [self.search(q, threshold, min_run) for q in queries]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda q: self.search(q, threshold, min_run),
                                 queries))

    def save(self, path) -> None:
        with open(path, "wb") as fp:
            fp.write(_HEADER.pack(_MAGIC, _VERSION, _MODES[self.config.mode],
                                  self.config.memory_budget_bytes,
                                  self.leaf_count, self.config.min_run,
                                  self.layout.node_count))
            for node in self.nodes:
                fp.write(node.to_bytes())
            for files in self.leaf_files:
                fp.write(struct.pack("<I", len(files)))
                for d in files:
                    fp.write(write_digest(d))

    @classmethod
    def load(cls, path) -> "HbftIndex":
        with open(path, "rb") as fp:
            data = fp.read()
        if len(data) < _HEADER.size:
            raise FormatError("truncated index header")
        magic, version, mode, budget, n, min_run, node_count = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise FormatError("bad index magic")
        if version != _VERSION:
            raise FormatError(f"unsupported index version {version}")
        if mode not in _MODE_NAMES:
            raise FormatError(f"unknown tree mode {mode}")
        cfg = TreeConfig(_MODE_NAMES[mode], budget, n, min_run)
        idx = cls(cfg)
        if node_count != idx.layout.node_count:
            raise FormatError("node count does not match leaf count")
        rest = data[_HEADER.size:]
        for i in range(node_count):
            f, rest = BloomFilter.read_from(rest)
            if f.size_bytes != idx.layout.node_sizes[i]:
                raise FormatError("node filter size does not match layout")
            idx.nodes[i] = f
        for leaf in range(n):
            if len(rest) < 4:
                raise FormatError("truncated leaf cache")
            (count,) = struct.unpack_from("<I", rest)
            rest = rest[4:]
            for _ in range(count):
                d, rest = read_digest_from(rest)
                idx.leaf_files[leaf].append(d)
                idx.leaf_of[d.file_id] = leaf
                idx.assignment_cursor += 1
        if rest:
            raise FormatError("trailing bytes after index")
        idx.finalized = True
        return idx
