import numpy as np
import pytest

from hbft.digest import chunk_stream, fnv1a
from hbft.errors import ConfigError, EmptyInputError

from conftest import random_bytes

FNV_PRIME = 0x100000001B3
FNV_BASIS = 0xCBF29CE484222325
M64 = (1 << 64) - 1


def fnv1a_reference(data: bytes) -> int:
    h = FNV_BASIS
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & M64
    return h


def test_fnv1a_reference_vectors():
    assert fnv1a(b"") == 14695981039346656037
    assert fnv1a(b"a") == 12638187200555641996


def test_fnv1a_matches_independent_implementation(rng):
    for size in (1, 7, 100, 4096):
        data = rng.bytes(size)
        assert fnv1a(data) == fnv1a_reference(data)


def test_fnv1a_deterministic():
    assert fnv1a(b"hello world") == fnv1a(b"hello world")


def test_empty_input_rejected():
    with pytest.raises(EmptyInputError):
        chunk_stream(b"")


def test_bad_block_size_rejected():
    with pytest.raises(ConfigError):
        chunk_stream(b"abcdef", block_size=1)


@pytest.mark.parametrize("size", [1, 3, 6])
def test_input_shorter_than_window_is_one_chunk(size, rng):
    data = rng.bytes(size)
    seq = chunk_stream(data)
    assert len(seq) == 1
    assert list(seq.ranges()) == [(0, size)]
    assert seq.hashes[0] == fnv1a(data)


def test_determinism(rng):
    data = rng.bytes(200_000)
    a = chunk_stream(data)
    b = chunk_stream(data)
    assert np.array_equal(a.ends, b.ends)
    assert np.array_equal(a.hashes, b.hashes)


def test_chunk_cover(rng):
    data = rng.bytes(50_000)
    seq = chunk_stream(data)
    spans = list(seq.ranges())
    assert spans[0][0] == 0
    assert spans[-1][1] == len(data)
    for (_, e1), (s2, _) in zip(spans, spans[1:]):
        assert e1 == s2
    assert b"".join(data[s:e] for s, e in spans) == data


def test_mean_chunk_length():
    data = random_bytes(11, 1 << 20)
    seq = chunk_stream(data)
    mean = len(data) / len(seq)
    assert 80 <= mean <= 320


def test_boundaries_match_independent_trigger_scan():
    # independent oracle: evaluate the 7-byte window hash at every position
    # from scratch instead of rolling it
    data = random_bytes(23, 60_000)
    block_size = 160
    expected = []
    for p in range(6, len(data)):
        h = 0
        for j in range(7):
            h = (h * 33 + data[p - 6 + j]) & M64
        if h % block_size == block_size - 1:
            expected.append(p + 1)
    if not expected or expected[-1] != len(data):
        expected.append(len(data))
    seq = chunk_stream(data, block_size)
    assert list(seq.ends) == expected


def test_per_chunk_hashes_match_reference():
    data = random_bytes(29, 5_000)
    seq = chunk_stream(data)
    for (start, end), h in zip(seq.ranges(), seq.hashes):
        assert int(h) == fnv1a_reference(data[start:end])
