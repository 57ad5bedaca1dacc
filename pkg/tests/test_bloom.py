import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbft.bloom import BloomFilter
from hbft.errors import ConfigError, FormatError, MergeError

sizes = st.sampled_from([32, 64, 128, 256, 512, 1024])
hashes64 = st.integers(min_value=0, max_value=2**64 - 1)


def test_new_filter_is_empty():
    f = BloomFilter(256)
    assert f.bit_count == 2048
    assert f.popcount() == 0
    assert f.set_count == 0


def test_new_filter_512mib_is_zero():
    f = BloomFilter(2**29)
    assert f.bit_count == 2**32
    assert f.popcount() == 0


@pytest.mark.parametrize("bad", [100, 0, 31, 16, 48, -256])
def test_new_filter_rejects_bad_sizes(bad):
    with pytest.raises(ConfigError):
        BloomFilter(bad)


def test_insert_then_contains():
    f = BloomFilter(256)
    assert not f.contains_hash(12345)
    f.insert_hash(12345)
    assert f.contains_hash(12345)


def test_insert_zero_hash_sets_single_bit():
    # every slice of the all-zero hash is zero, so only bit 0 is set
    f = BloomFilter(256)
    f.insert_hash(0)
    assert f.popcount() == 1
    assert f.bits[0] == 1


def test_double_insert_is_idempotent():
    a = BloomFilter(256)
    b = BloomFilter(256)
    a.insert_hash(987654321)
    b.insert_hash(987654321)
    b.insert_hash(987654321)
    assert np.array_equal(a.bits, b.bits)


def test_saturated_filter_contains_everything(rng):
    f = BloomFilter(64)
    f.bits[:] = 0xFF
    for h in rng.integers(0, 2**63, size=50):
        assert f.contains_hash(int(h))


def test_merge_identity_and_preservation(rng):
    src = BloomFilter(128)
    hs = [int(h) for h in rng.integers(0, 2**63, size=30)]
    src.insert_many(np.array(hs, np.uint64))
    dst = BloomFilter(128)
    dst.merge_from(src)
    assert np.array_equal(dst.bits, src.bits)
    for h in hs:
        assert dst.contains_hash(h)


def test_merge_commutes(rng):
    a1, b1 = BloomFilter(64), BloomFilter(64)
    a1.insert_many(rng.integers(0, 2**63, size=10).astype(np.uint64))
    b1.insert_many(rng.integers(0, 2**63, size=10).astype(np.uint64))
    ab = BloomFilter(64)
    ab.merge_from(a1)
    ab.merge_from(b1)
    ba = BloomFilter(64)
    ba.merge_from(b1)
    ba.merge_from(a1)
    assert np.array_equal(ab.bits, ba.bits)


def test_merge_size_mismatch():
    with pytest.raises(MergeError):
        BloomFilter(64).merge_from(BloomFilter(128))


def test_fill_ratio_bounds():
    f = BloomFilter(256)
    assert f.fill_ratio() == 0.0
    f.bits[:] = 0xFF
    assert f.fill_ratio() == 1.0


def test_fill_ratio_single_insert_with_distinct_indices(rng):
    # find a hash whose 5 slices land on distinct bits
    f = None
    for h in rng.integers(0, 2**64, size=100, dtype=np.uint64):
        probe = BloomFilter(256)
        probe.insert_hash(int(h))
        if probe.popcount() == 5:
            f = probe
            break
    assert f is not None
    assert f.fill_ratio() == 5 / 2048


@settings(max_examples=200, deadline=None)
@given(size=sizes, hs=st.lists(hashes64, min_size=1, max_size=40))
def test_no_false_negatives(size, hs):
    f = BloomFilter(size)
    for h in hs:
        f.insert_hash(h)
    assert all(f.contains_hash(h) for h in hs)


@settings(max_examples=200, deadline=None)
@given(size=sizes, hs=st.lists(hashes64, min_size=1, max_size=20), h=hashes64)
def test_reinsert_leaves_bits_unchanged(size, hs, h):
    f = BloomFilter(size)
    f.insert_many(np.array(hs + [h], np.uint64))
    before = f.bits.copy()
    f.insert_hash(h)
    assert np.array_equal(f.bits, before)


@settings(max_examples=200, deadline=None)
@given(size=sizes,
       ha=st.lists(hashes64, max_size=15), hb=st.lists(hashes64, max_size=15),
       probe=hashes64)
def test_merge_soundness(size, ha, hb, probe):
    a = BloomFilter(size)
    b = BloomFilter(size)
    a.insert_many(np.array(ha, np.uint64))
    b.insert_many(np.array(hb, np.uint64))
    merged = BloomFilter(size)
    merged.merge_from(a)
    merged.merge_from(b)
    assert np.array_equal(merged.bits, np.bitwise_or(a.bits, b.bits))
    # anything contained in either side is contained in the merge
    if a.contains_hash(probe) or b.contains_hash(probe):
        assert merged.contains_hash(probe)
    for h in ha + hb:
        assert merged.contains_hash(h)


def test_serialization_roundtrip(rng):
    f = BloomFilter(512)
    f.insert_many(rng.integers(0, 2**63, size=100).astype(np.uint64))
    g = BloomFilter.from_bytes(f.to_bytes())
    assert g.size_bytes == 512
    assert np.array_equal(g.bits, f.bits)


def test_serialization_rejects_garbage():
    with pytest.raises(FormatError):
        BloomFilter.from_bytes(b"not a filter at all")
    f = BloomFilter(32)
    blob = bytearray(f.to_bytes())
    blob[0] ^= 0xFF
    with pytest.raises(FormatError):
        BloomFilter.from_bytes(bytes(blob))
