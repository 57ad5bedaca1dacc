"""The compiled and pure kernels must be interchangeable: identical chunk
boundaries, identical bits, identical scores."""

import numpy as np
import pytest

from hbft import _kernels_py as pure

compiled = pytest.importorskip("hbft._kernels")


@pytest.fixture
def data(rng):
    return rng.bytes(100_000)


def test_fnv1a_agrees(rng):
    for size in (0, 1, 6, 7, 8, 1000):
        blob = rng.bytes(size)
        assert compiled.fnv1a(blob) == pure.fnv1a(blob)


def test_chunking_agrees(data):
    for block_size in (16, 160, 997):
        ce, ch = compiled.chunk_ends_and_hashes(data, block_size)
        pe, ph = pure.chunk_ends_and_hashes(data, block_size)
        assert np.array_equal(ce, pe)
        assert np.array_equal(ch, ph)


def test_chunking_agrees_short_inputs(rng):
    for size in (1, 6, 7, 8, 20):
        blob = rng.bytes(size)
        ce, ch = compiled.chunk_ends_and_hashes(blob, 160)
        pe, ph = pure.chunk_ends_and_hashes(blob, 160)
        assert np.array_equal(ce, pe)
        assert np.array_equal(ch, ph)


def test_bloom_ops_agree(rng):
    for log2_bits in (8, 11, 16):
        nbytes = (1 << log2_bits) // 8
        hashes = rng.integers(0, 2**64, size=200, dtype=np.uint64)
        a = np.zeros(nbytes, np.uint8)
        b = np.zeros(nbytes, np.uint8)
        compiled.bloom_insert_many(a, log2_bits, hashes)
        pure.bloom_insert_many(b, log2_bits, hashes)
        assert np.array_equal(a, b)
        probes = rng.integers(0, 2**64, size=200, dtype=np.uint64)
        for h in probes:
            assert compiled.bloom_contains(a, log2_bits, h) == \
                pure.bloom_contains(a, log2_bits, h)
        for min_run in (1, 3, 5):
            mixed = np.concatenate([hashes[:10], probes[:10], hashes[10:20]])
            assert compiled.bloom_contains_run(a, log2_bits, mixed, min_run) == \
                pure.bloom_contains_run(a, log2_bits, mixed, min_run)


def test_popcounts_agree(rng):
    for size in (8, 32, 256, 4096):
        a = rng.integers(0, 256, size=size, dtype=np.uint8)
        b = rng.integers(0, 256, size=size, dtype=np.uint8)
        assert compiled.popcount_bytes(a) == pure.popcount_bytes(a)
        assert compiled.and_popcount(a, b) == pure.and_popcount(a, b)


def _random_packed(rng, nfilters, width=256):
    mat = np.zeros((nfilters, width), np.uint8)
    for i in range(nfilters):
        compiled.bloom_insert_many(
            mat[i], 11, rng.integers(0, 2**64, size=int(rng.integers(1, 200)),
                                     dtype=np.uint64))
    pops = np.array([compiled.popcount_bytes(row) for row in mat], np.int64)
    return np.ascontiguousarray(mat), pops


def test_compare_packed_agrees(rng):
    for _ in range(50):
        fa, pa = _random_packed(rng, int(rng.integers(1, 6)))
        fb, pb = _random_packed(rng, int(rng.integers(1, 6)))
        assert compiled.compare_packed(fa, pa, fb, pb, 2048) == \
            pure.compare_packed(fa, pa, fb, pb, 2048)


def test_all_pairs_agrees(rng):
    fa, pa = _random_packed(rng, 12)
    offa = np.array([0, 2, 3, 6, 9, 12], np.int64)
    fb, pb = _random_packed(rng, 8)
    offb = np.array([0, 1, 4, 8], np.int64)
    got = compiled.all_pairs_scores(fa, offa, pa, fb, offb, pb, 2048, 0)
    want = pure.all_pairs_scores(fa, offa, pa, fb, offb, pb, 2048, 0)
    for g, w in zip(got, want):
        assert np.array_equal(g, w)
