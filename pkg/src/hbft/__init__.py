"""Bloom-filter similarity digests with a hierarchical Bloom filter tree
index for corpus-scale approximate matching."""

from ._backend import BACKEND
from .bloom import BloomFilter
from .digest import (ChunkSequence, SimilarityDigest, all_against_all,
                     chunk_stream, compare_digests, fnv1a, make_digest,
                     read_digest, write_digest)
from .errors import (BudgetError, ConfigError, EmptyInputError, FormatError,
                     HbftError, MergeError, PlantingError)
from .tree import (HbftIndex, SearchReport, TreeConfig, TreeLayout,
                   node_matches, plan_layout)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BloomFilter", "BudgetError", "ChunkSequence", "ConfigError",
    "EmptyInputError", "FormatError", "HbftError", "HbftIndex", "MergeError",
    "PlantingError", "SearchReport", "SimilarityDigest", "TreeConfig",
    "TreeLayout", "all_against_all", "chunk_stream", "compare_digests",
    "fnv1a", "make_digest", "node_matches", "plan_layout", "read_digest",
    "write_digest",
]
