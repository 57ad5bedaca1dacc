"""Similarity digests: content-defined chunking, chunk hashing, digest
construction and comparison, plus the all-against-all baseline.

A file is split into ~160-byte chunks wherever a 7-byte rolling window hash
hits a trigger value.  Each chunk's 64-bit FNV-1a hash sets 5 bits in the
current 256-byte digest filter; after 160 chunks a fresh filter is appended.
The raw hash sequence is retained so the same digest can be probed against
tree nodes of any size.
"""

import struct
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .bloom import BloomFilter
from .errors import ConfigError, EmptyInputError, FormatError

DEFAULT_BLOCK_SIZE = 160
DEFAULT_FILTER_BYTES = 256
DEFAULT_FILTER_CAPACITY = 160

_MAGIC = b"HBFT-SD\0"
_VERSION = 1
_HEADER = struct.Struct("<8sIIIIQIQI")


def fnv1a(data: bytes) -> int:
    """64-bit FNV-1a hash of ``data``."""
    return int(kernels.fnv1a(data))


@dataclass
class ChunkSequence:
    """Chunk boundaries (end offsets, exclusive) and per-chunk hashes."""

    ends: np.ndarray    # int64, strictly increasing, last == input length
    hashes: np.ndarray  # uint64, one per chunk

    def __len__(self) -> int:
        return len(self.ends)

    def ranges(self):
        start = 0
        for end in self.ends:
            yield (start, int(end))
            start = int(end)


def chunk_stream(data: bytes, block_size: int = DEFAULT_BLOCK_SIZE) -> ChunkSequence:
    """Content-defined chunking of ``data``.

    Inputs shorter than the 7-byte window, or with no trigger hit, come back
    as a single chunk.  Empty input is rejected.
    """
    if len(data) == 0:
        raise EmptyInputError("cannot chunk empty input")
    if block_size < 2:
        raise ConfigError(f"block_size must be >= 2, got {block_size}")
    ends, hashes = kernels.chunk_ends_and_hashes(data, block_size)
    return ChunkSequence(ends=np.asarray(ends), hashes=np.asarray(hashes))


class SimilarityDigest:
    """Bloom-filter similarity digest of one file."""

    __slots__ = ("file_id", "file_size", "filters", "chunk_count", "hashes",
                 "block_size", "filter_bytes", "filter_capacity", "_packed")

    def __init__(self, file_id, file_size, filters, hashes,
                 block_size=DEFAULT_BLOCK_SIZE,
                 filter_bytes=DEFAULT_FILTER_BYTES,
                 filter_capacity=DEFAULT_FILTER_CAPACITY):
        self.file_id = file_id
        self.file_size = file_size
        self.filters = filters
        self.hashes = hashes
        self.chunk_count = len(hashes)
        self.block_size = block_size
        self.filter_bytes = filter_bytes
        self.filter_capacity = filter_capacity
        self._packed = None

    def packed(self):
        """(filter matrix, per-filter popcounts), cached for comparisons."""
        if self._packed is None:
            mat = np.vstack([f.bits for f in self.filters])
            pops = np.array([f.popcount() for f in self.filters], np.int64)
            self._packed = (np.ascontiguousarray(mat), pops)
        return self._packed


def make_digest(file_id, data: bytes,
                block_size: int = DEFAULT_BLOCK_SIZE,
                filter_bytes: int = DEFAULT_FILTER_BYTES,
                filter_capacity: int = DEFAULT_FILTER_CAPACITY) -> SimilarityDigest:
    """Chunk ``data`` and build its similarity digest."""
    seq = chunk_stream(data, block_size)
    filters = []
    for start in range(0, len(seq.hashes), filter_capacity):
        f = BloomFilter(filter_bytes)
        f.insert_many(seq.hashes[start:start + filter_capacity])
        filters.append(f)
    return SimilarityDigest(file_id, len(data), filters, seq.hashes,
                            block_size, filter_bytes, filter_capacity)


def compare_digests(a: SimilarityDigest, b: SimilarityDigest) -> int:
    """Symmetric similarity score in 0..100; compare(a, a) == 100."""
    if not a.filters or not b.filters:
        raise EmptyInputError("cannot compare an empty digest")
    if a.filter_bytes != b.filter_bytes:
        raise ConfigError("digests use different filter sizes")
    fa, pa = a.packed()
    fb, pb = b.packed()
    return int(kernels.compare_packed(fa, pa, fb, pb, a.filter_bytes * 8))


def _pack_corpus(digests):
    """Concatenate digest filters into one matrix with per-digest row ranges."""
    mats, pops, offsets = [], [], [0]
    for d in digests:
        m, p = d.packed()
        mats.append(m)
        pops.append(p)
        offsets.append(offsets[-1] + len(p))
    return (np.ascontiguousarray(np.vstack(mats)),
            np.array(offsets, np.int64),
            np.concatenate(pops))


def all_against_all(set_a, set_b, threshold: int):
    """Compare every digest of ``set_a`` against every digest of ``set_b``.

    Returns (hits, comparison_count) where hits is a list of
    (file_id_a, file_id_b, score) with score >= threshold and
    comparison_count is exactly ``len(set_a) * len(set_b)``.
    """
    count = len(set_a) * len(set_b)
    if count == 0:
        return [], 0
    fb_bytes = set_a[0].filter_bytes
    fa, offa, pa = _pack_corpus(set_a)
    fb, offb, pb = _pack_corpus(set_b)
    ii, jj, ss = kernels.all_pairs_scores(fa, offa, pa, fb, offb, pb,
                                          fb_bytes * 8, threshold)
    hits = [(set_a[i].file_id, set_b[j].file_id, int(s))
            for i, j, s in zip(ii, jj, ss)]
    return hits, count


def write_digest(d: SimilarityDigest) -> bytes:
    """Serialize a digest to the on-disk format."""
    file_id = str(d.file_id).encode("utf-8")
    out = [_HEADER.pack(_MAGIC, _VERSION, d.block_size, d.filter_bytes,
                        d.filter_capacity, d.chunk_count, len(d.filters),
                        d.file_size, len(file_id)),
           file_id]
    out.extend(f.to_bytes() for f in d.filters)
    out.append(np.ascontiguousarray(d.hashes, np.uint64).tobytes())
    return b"".join(out)


def read_digest(data: bytes) -> SimilarityDigest:
    d, rest = read_digest_from(data)
    if rest:
        raise FormatError("trailing bytes after digest")
    return d


def read_digest_from(data: bytes):
    """Parse one digest from the head of ``data``; returns (digest, rest)."""
    if len(data) < _HEADER.size:
        raise FormatError("truncated digest header")
    (magic, version, block_size, filter_bytes, filter_capacity,
     chunk_count, filter_count, file_size, id_len) = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise FormatError("bad digest magic")
    if version != _VERSION:
        raise FormatError(f"unsupported digest version {version}")
    pos = _HEADER.size
    file_id = data[pos:pos + id_len].decode("utf-8")
    pos += id_len
    filters = []
    rest = data[pos:]
    for _ in range(filter_count):
        f, rest = BloomFilter.read_from(rest)
        if f.size_bytes != filter_bytes:
            raise FormatError("digest filter size mismatch")
        filters.append(f)
    nbytes = chunk_count * 8
    if len(rest) < nbytes:
        raise FormatError("truncated chunk-hash list")
    hashes = np.frombuffer(rest[:nbytes], np.uint64).copy()
    d = SimilarityDigest(file_id, file_size, filters, hashes,
                         block_size, filter_bytes, filter_capacity)
    return d, rest[nbytes:]
