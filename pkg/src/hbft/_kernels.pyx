# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot-path kernels: rolling-hash chunking, Bloom bit ops, digest scoring.

The pure-Python module ``_kernels_py`` implements the same interface and must
stay behaviourally identical; ``tests/test_backends.py`` checks the two against
each other.
"""

from libc.math cimport sqrt
from libc.stdint cimport int64_t, uint8_t, uint64_t
from libc.string cimport memcpy

import numpy as np

NAME = "compiled"

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cdef uint64_t FNV_PRIME = 0x100000001B3ULL
cdef uint64_t FNV_BASIS = 0xCBF29CE484222325ULL
cdef uint64_t WINDOW_POW = 1291467969ULL      # 33**6, weight of the outgoing byte
cdef int HASHES_PER_KEY = 5


def fnv1a(const uint8_t[::1] data) -> int:
    """64-bit FNV-1a over ``data``."""
    cdef uint64_t h = FNV_BASIS
    cdef Py_ssize_t i
    for i in range(data.shape[0]):
        h = (h ^ data[i]) * FNV_PRIME
    return h


def chunk_ends_and_hashes(const uint8_t[::1] data, uint64_t block_size):
    """Split ``data`` at rolling-hash trigger points.

    A 7-byte window slides over the input; a chunk ends at position ``i`` when
    the window hash modulo ``block_size`` equals ``block_size - 1``.  Returns
    (chunk end offsets, FNV-1a hash per chunk).  The trailing bytes after the
    last trigger always form a final chunk.
    """
    cdef Py_ssize_t n = data.shape[0]
    if n == 0:
        return np.empty(0, np.int64), np.empty(0, np.uint64)
    ends_arr = np.empty(n, np.int64)
    hash_arr = np.empty(n, np.uint64)
    cdef int64_t[::1] ends = ends_arr
    cdef uint64_t[::1] hashes = hash_arr
    cdef uint64_t roll = 0, fnv = FNV_BASIS, target = block_size - 1
    cdef Py_ssize_t i, count = 0
    cdef uint8_t b
    with nogil:
        for i in range(n):
            b = data[i]
            if i < 7:
                roll = roll * 33ULL + b
            else:
                roll = (roll - data[i - 7] * WINDOW_POW) * 33ULL + b
            fnv = (fnv ^ b) * FNV_PRIME
            if i >= 6 and roll % block_size == target:
                ends[count] = i + 1
                hashes[count] = fnv
                count += 1
                fnv = FNV_BASIS
        if count == 0 or ends[count - 1] != n:
            ends[count] = n
            hashes[count] = fnv
            count += 1
    return ends_arr[:count].copy(), hash_arr[:count].copy()


cdef inline uint64_t bit_index(uint64_t h, int width, int k, uint64_t mask) nogil:
    # k-th slice of ``width`` bits, read from the hash treated as a 64-bit ring.
    cdef int rot = (k * width) & 63
    cdef uint64_t v
    if rot == 0:
        v = h
    else:
        v = (h >> rot) | (h << (64 - rot))
    return v & mask


def bloom_insert_many(uint8_t[::1] bits, int log2_bits, const uint64_t[::1] hashes):
    """Set the 5 derived bits for every hash in ``hashes``."""
    cdef uint64_t mask = (<uint64_t>1 << log2_bits) - 1
    cdef Py_ssize_t i
    cdef int k
    cdef uint64_t idx
    with nogil:
        for i in range(hashes.shape[0]):
            for k in range(HASHES_PER_KEY):
                idx = bit_index(hashes[i], log2_bits, k, mask)
                bits[idx >> 3] |= <uint8_t>(1 << (idx & 7))


cdef inline bint _contains(const uint8_t[::1] bits, int log2_bits, uint64_t mask,
                           uint64_t h) nogil:
    cdef int k
    cdef uint64_t idx
    for k in range(HASHES_PER_KEY):
        idx = bit_index(h, log2_bits, k, mask)
        if not (bits[idx >> 3] & (1 << (idx & 7))):
            return False
    return True


def bloom_contains(const uint8_t[::1] bits, int log2_bits, uint64_t h) -> bool:
    cdef uint64_t mask = (<uint64_t>1 << log2_bits) - 1
    return _contains(bits, log2_bits, mask, h)


def bloom_contains_run(const uint8_t[::1] bits, int log2_bits,
                       const uint64_t[::1] hashes, int min_run) -> bool:
    """True iff ``min_run`` consecutive hashes are all contained; a miss resets
    the run counter."""
    cdef uint64_t mask = (<uint64_t>1 << log2_bits) - 1
    cdef Py_ssize_t i
    cdef int run = 0
    cdef bint found = False
    with nogil:
        for i in range(hashes.shape[0]):
            if _contains(bits, log2_bits, mask, hashes[i]):
                run += 1
                if run >= min_run:
                    found = True
                    break
            else:
                run = 0
    return found


cdef inline int64_t _popcount_bytes(const uint8_t *buf, Py_ssize_t n) nogil:
    cdef int64_t total = 0
    cdef Py_ssize_t i = 0
    cdef uint64_t w
    while i + 8 <= n:
        memcpy(&w, buf + i, 8)
        total += __builtin_popcountll(w)
        i += 8
    while i < n:
        total += __builtin_popcountll(buf[i])
        i += 1
    return total


cdef inline int64_t _and_popcount(const uint8_t *a, const uint8_t *b, Py_ssize_t n) nogil:
    cdef int64_t total = 0
    cdef Py_ssize_t i = 0
    cdef uint64_t wa, wb
    while i + 8 <= n:
        memcpy(&wa, a + i, 8)
        memcpy(&wb, b + i, 8)
        total += __builtin_popcountll(wa & wb)
        i += 8
    while i < n:
        total += __builtin_popcountll(a[i] & b[i])
        i += 1
    return total


def popcount_bytes(const uint8_t[::1] buf) -> int:
    if buf.shape[0] == 0:
        return 0
    return _popcount_bytes(&buf[0], buf.shape[0])


def and_popcount(const uint8_t[::1] a, const uint8_t[::1] b) -> int:
    if a.shape[0] != b.shape[0]:
        raise ValueError("length mismatch")
    if a.shape[0] == 0:
        return 0
    return _and_popcount(&a[0], &b[0], a.shape[0])


cdef double _mean_best(const uint8_t *fs, const int64_t *ps, Py_ssize_t ns,
                       const uint8_t *fl, const int64_t *pl, Py_ssize_t nl,
                       Py_ssize_t width, double bit_count) nogil:
    # Mean over the rows of the shorter side of the best match fraction against
    # any row of the longer side, correcting for the expected random overlap.
    cdef Py_ssize_t i, j
    cdef double best, m, e, noise, min_bits, denom, total = 0.0
    for i in range(ns):
        best = 0.0
        for j in range(nl):
            e = _and_popcount(fs + i * width, fl + j * width, width)
            # expected random overlap plus a 4-sigma noise margin; overlap
            # below this floor scores zero
            noise = (<double>ps[i]) * (<double>pl[j]) / bit_count
            noise = noise + 4.0 * sqrt(noise)
            min_bits = <double>(ps[i] if ps[i] < pl[j] else pl[j])
            if min_bits == 0.0:
                m = 0.0
            else:
                denom = min_bits - noise
                if denom <= 0.0:
                    m = 1.0 if e >= min_bits else 0.0
                else:
                    m = (e - noise) / denom
                    if m < 0.0:
                        m = 0.0
                    elif m > 1.0:
                        m = 1.0
            if m > best:
                best = m
        total += best
    return total / ns


cdef inline int _score(const uint8_t *fa, const int64_t *pa, Py_ssize_t na,
                       const uint8_t *fb, const int64_t *pb, Py_ssize_t nb,
                       Py_ssize_t width, double bit_count) nogil:
    cdef double mean
    if na < nb:
        mean = _mean_best(fa, pa, na, fb, pb, nb, width, bit_count)
    elif nb < na:
        mean = _mean_best(fb, pb, nb, fa, pa, na, width, bit_count)
    else:
        # Equal filter counts: average both orientations to keep the score
        # symmetric.
        mean = 0.5 * (_mean_best(fa, pa, na, fb, pb, nb, width, bit_count)
                      + _mean_best(fb, pb, nb, fa, pa, na, width, bit_count))
    return <int>(mean * 100.0 + 0.5)


def compare_packed(const uint8_t[:, ::1] fa, const int64_t[::1] pa,
                   const uint8_t[:, ::1] fb, const int64_t[::1] pb,
                   int64_t bit_count) -> int:
    """Similarity score (0-100) between two digests given as filter matrices
    with per-filter popcounts."""
    if fa.shape[1] != fb.shape[1]:
        raise ValueError("filter width mismatch")
    return _score(&fa[0, 0], &pa[0], fa.shape[0],
                  &fb[0, 0], &pb[0], fb.shape[0],
                  fa.shape[1], <double>bit_count)


def all_pairs_scores(const uint8_t[:, ::1] fa, const int64_t[::1] offa,
                     const int64_t[::1] pa,
                     const uint8_t[:, ::1] fb, const int64_t[::1] offb,
                     const int64_t[::1] pb,
                     int64_t bit_count, int threshold):
    """Score every digest pair of two packed corpora.

    Digest ``i`` of a corpus owns filter rows ``off[i]:off[i+1]``.  Returns
    (i indices, j indices, scores) for pairs scoring >= threshold.
    """
    if fa.shape[1] != fb.shape[1]:
        raise ValueError("filter width mismatch")
    cdef Py_ssize_t na = offa.shape[0] - 1
    cdef Py_ssize_t nb = offb.shape[0] - 1
    cdef Py_ssize_t width = fa.shape[1]
    cdef const uint8_t *base_a = &fa[0, 0]
    cdef const uint8_t *base_b = &fb[0, 0]
    cdef Py_ssize_t i, j
    cdef int s
    hits_i, hits_j, hits_s = [], [], []
    for i in range(na):
        for j in range(nb):
            s = _score(base_a + offa[i] * width, &pa[offa[i]], offa[i + 1] - offa[i],
                       base_b + offb[j] * width, &pb[offb[j]], offb[j + 1] - offb[j],
                       width, <double>bit_count)
            if s >= threshold:
                hits_i.append(i)
                hits_j.append(j)
                hits_s.append(s)
    return (np.asarray(hits_i, dtype=np.int64),
            np.asarray(hits_j, dtype=np.int64),
            np.asarray(hits_s, dtype=np.int64))
