"""Fixed-size Bloom filter used for per-file digests and tree nodes.

Every filter size is a power of two, so the 5 bit indices for a 64-bit chunk
hash are 5 consecutive ``log2(bit_count)``-bit slices of the hash (read from
the least-significant bit, wrapping around the 64-bit word).  The same raw
hash therefore maps consistently into filters of any size, which is what lets
one digest be probed at every level of a variable-width tree.
"""

import struct

import numpy as np

from ._backend import kernels
from .errors import ConfigError, FormatError, MergeError

MIN_SIZE_BYTES = 32

_MAGIC = b"HBFT-BF\0"
_VERSION = 1
_HEADER = struct.Struct("<8sII")


class BloomFilter:
    __slots__ = ("bits", "size_bytes", "bit_count", "set_count")

    def __init__(self, size_bytes: int):
        if size_bytes < MIN_SIZE_BYTES or size_bytes & (size_bytes - 1):
            raise ConfigError(
                f"filter size must be a power of two >= {MIN_SIZE_BYTES} bytes, "
                f"got {size_bytes}")
        self.size_bytes = size_bytes
        self.bit_count = size_bytes * 8
        self.bits = np.zeros(size_bytes, np.uint8)
        self.set_count = 0

    @property
    def log2_bits(self) -> int:
        return self.bit_count.bit_length() - 1

    def insert_hash(self, h: int) -> None:
        kernels.bloom_insert_many(self.bits, self.log2_bits,
                                  np.array([h], np.uint64))
        self.set_count += 1

    def insert_many(self, hashes) -> None:
        hashes = np.ascontiguousarray(hashes, np.uint64)
        kernels.bloom_insert_many(self.bits, self.log2_bits, hashes)
        self.set_count += len(hashes)

    def contains_hash(self, h: int) -> bool:
        return bool(kernels.bloom_contains(self.bits, self.log2_bits, np.uint64(h)))

    def contains_run(self, hashes, min_run: int) -> bool:
        """True iff ``min_run`` consecutive hashes are all contained."""
        hashes = np.ascontiguousarray(hashes, np.uint64)
        return bool(kernels.bloom_contains_run(self.bits, self.log2_bits,
                                               hashes, min_run))

    def merge_from(self, src: "BloomFilter") -> None:
        if src.size_bytes != self.size_bytes:
            raise MergeError(
                f"cannot merge {src.size_bytes}-byte filter into "
                f"{self.size_bytes}-byte filter")
        np.bitwise_or(self.bits, src.bits, out=self.bits)
        self.set_count += src.set_count

    def fill_ratio(self) -> float:
        return kernels.popcount_bytes(self.bits) / self.bit_count

    def popcount(self) -> int:
        return kernels.popcount_bytes(self.bits)

    def __eq__(self, other) -> bool:
        # set_count is a diagnostic and deliberately excluded.
        if not isinstance(other, BloomFilter):
            return NotImplemented
        return (self.size_bytes == other.size_bytes
                and bool(np.array_equal(self.bits, other.bits)))

    def to_bytes(self) -> bytes:
        log2_size = self.size_bytes.bit_length() - 1
        return _HEADER.pack(_MAGIC, _VERSION, log2_size) + self.bits.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomFilter":
        f, rest = cls.read_from(data)
        if rest:
            raise FormatError("trailing bytes after Bloom filter")
        return f

    @classmethod
    def read_from(cls, data: bytes) -> tuple["BloomFilter", bytes]:
        """Parse one serialized filter from the head of ``data``."""
        if len(data) < _HEADER.size:
            raise FormatError("truncated Bloom filter header")
        magic, version, log2_size = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise FormatError("bad Bloom filter magic")
        if version != _VERSION:
            raise FormatError(f"unsupported Bloom filter version {version}")
        size = 1 << log2_size
        end = _HEADER.size + size
        if len(data) < end:
            raise FormatError("truncated Bloom filter body")
        f = cls(size)
        f.bits = np.frombuffer(data[_HEADER.size:end], np.uint8).copy()
        return f, data[end:]
