"""Pure-Python fallback for the compiled kernels in ``_kernels.pyx``.

Same interface and bit-for-bit identical results, selected by ``_backend``
when the extension is not built.  numpy keeps the heavier loops tolerable,
but this path is expected to be noticeably slower (see benchmarks/).
"""

import numpy as np

NAME = "pure"

_M64 = (1 << 64) - 1
_FNV_PRIME = 0x100000001B3
_FNV_BASIS = 0xCBF29CE484222325
_WINDOW_POW = 33**6
_HASHES_PER_KEY = 5

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def fnv1a(data) -> int:
    h = _FNV_BASIS
    for b in bytes(data):
        h = ((h ^ b) * _FNV_PRIME) & _M64
    return h


def chunk_ends_and_hashes(data, block_size):
    """Split ``data`` at rolling-hash trigger points; see the compiled twin."""
    buf = bytes(data)
    n = len(buf)
    if n == 0:
        return np.empty(0, np.int64), np.empty(0, np.uint64)
    if n < 7:
        return (np.array([n], np.int64),
                np.array([fnv1a(buf)], np.uint64))
    arr = np.frombuffer(buf, np.uint8).astype(np.uint64)
    # Window hash ending at position p (p >= 6): sum of the last 7 bytes
    # weighted by powers of 33.  Small enough that uint64 never wraps.
    acc = np.zeros(n - 6, np.uint64)
    for j in range(7):
        acc += arr[j:n - 6 + j] * np.uint64(33 ** (6 - j))
    trigger = (acc % np.uint64(block_size)) == np.uint64(block_size - 1)
    ends = (np.nonzero(trigger)[0] + 7).astype(np.int64)
    if len(ends) == 0 or ends[-1] != n:
        ends = np.append(ends, np.int64(n))
    hashes = np.empty(len(ends), np.uint64)
    start = 0
    for i, end in enumerate(ends):
        h = _FNV_BASIS
        for b in buf[start:end]:
            h = ((h ^ b) * _FNV_PRIME) & _M64
        hashes[i] = h
        start = int(end)
    return ends, hashes


def _bit_indices(h, width, mask):
    """The 5 slice indices for one hash (python ints)."""
    out = []
    for k in range(_HASHES_PER_KEY):
        rot = (k * width) & 63
        v = h if rot == 0 else ((h >> rot) | (h << (64 - rot))) & _M64
        out.append(v & mask)
    return out


def bloom_insert_many(bits, log2_bits, hashes):
    hs = np.ascontiguousarray(hashes, np.uint64)
    if len(hs) == 0:
        return
    mask = np.uint64((1 << log2_bits) - 1)
    for k in range(_HASHES_PER_KEY):
        rot = (k * log2_bits) & 63
        if rot == 0:
            v = hs
        else:
            v = (hs >> np.uint64(rot)) | (hs << np.uint64(64 - rot))
        idx = v & mask
        np.bitwise_or.at(bits, (idx >> np.uint64(3)).astype(np.int64),
                         np.left_shift(1, (idx & np.uint64(7)).astype(np.int64)).astype(np.uint8))


def bloom_contains(bits, log2_bits, h) -> bool:
    mask = (1 << log2_bits) - 1
    for idx in _bit_indices(int(h), log2_bits, mask):
        if not bits[idx >> 3] & (1 << (idx & 7)):
            return False
    return True


def _contains_many(bits, log2_bits, hs):
    mask = np.uint64((1 << log2_bits) - 1)
    ok = np.ones(len(hs), bool)
    for k in range(_HASHES_PER_KEY):
        rot = (k * log2_bits) & 63
        if rot == 0:
            v = hs
        else:
            v = (hs >> np.uint64(rot)) | (hs << np.uint64(64 - rot))
        idx = v & mask
        byte = bits[(idx >> np.uint64(3)).astype(np.int64)]
        bit = np.left_shift(1, (idx & np.uint64(7)).astype(np.int64)).astype(np.uint8)
        ok &= (byte & bit) != 0
    return ok


def bloom_contains_run(bits, log2_bits, hashes, min_run) -> bool:
    hs = np.ascontiguousarray(hashes, np.uint64)
    if len(hs) < min_run:
        return False
    contained = _contains_many(np.asarray(bits), log2_bits, hs)
    windows = np.lib.stride_tricks.sliding_window_view(contained, min_run)
    return bool(windows.all(axis=1).any())


def popcount_bytes(buf) -> int:
    return int(_POP8[np.asarray(buf)].sum())


def and_popcount(a, b) -> int:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    return int(_POP8[np.bitwise_and(a, b)].sum())


def _mean_best(fs, ps, fl, pl, bit_count):
    total = 0.0
    pl = pl.astype(np.float64)
    for i in range(fs.shape[0]):
        e = _POP8[np.bitwise_and(fs[i], fl)].sum(axis=1).astype(np.float64)
        # expected random overlap plus a 4-sigma noise margin; overlap below
        # this floor scores zero
        noise = float(ps[i]) * pl / bit_count
        noise = noise + 4.0 * np.sqrt(noise)
        min_bits = np.minimum(float(ps[i]), pl)
        denom = min_bits - noise
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.clip((e - noise) / denom, 0.0, 1.0)
        m = np.where(denom <= 0.0, np.where(e >= min_bits, 1.0, 0.0), m)
        m = np.where(min_bits == 0.0, 0.0, m)
        total += float(m.max())
    return total / fs.shape[0]


def compare_packed(fa, pa, fb, pb, bit_count) -> int:
    fa = np.asarray(fa)
    fb = np.asarray(fb)
    if fa.shape[1] != fb.shape[1]:
        raise ValueError("filter width mismatch")
    bc = float(bit_count)
    na, nb = fa.shape[0], fb.shape[0]
    if na < nb:
        mean = _mean_best(fa, pa, fb, pb, bc)
    elif nb < na:
        mean = _mean_best(fb, pb, fa, pa, bc)
    else:
        mean = 0.5 * (_mean_best(fa, pa, fb, pb, bc) + _mean_best(fb, pb, fa, pa, bc))
    return int(mean * 100.0 + 0.5)


def all_pairs_scores(fa, offa, pa, fb, offb, pb, bit_count, threshold):
    fa = np.asarray(fa)
    fb = np.asarray(fb)
    hits_i, hits_j, hits_s = [], [], []
    for i in range(len(offa) - 1):
        ra = slice(int(offa[i]), int(offa[i + 1]))
        for j in range(len(offb) - 1):
            rb = slice(int(offb[j]), int(offb[j + 1]))
            s = compare_packed(fa[ra], pa[ra], fb[rb], pb[rb], bit_count)
            if s >= threshold:
                hits_i.append(i)
                hits_j.append(j)
                hits_s.append(s)
    return (np.asarray(hits_i, dtype=np.int64),
            np.asarray(hits_j, dtype=np.int64),
            np.asarray(hits_s, dtype=np.int64))
