# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling loops for games with a dense worth table.

Mirrors ``_pykernels`` draw-for-draw: the same xoshiro256++ stream, the same
masked-rejection bounded integers, the same partial Fisher-Yates subset
draws, and the same order of floating-point updates, so results are
bit-identical to the pure-Python fallback.  Do not change one side without
the other; ``tests/test_backends.py`` enforces parity.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

ALG_INDEPENDENT = 0
ALG_SAME_LENGTH = 1
ALG_IDENTICAL = 2
ALG_CMCS = 3
ALG_PERMUTATION = 4

_MAX_PLAYERS = 25  # player buffers below are sized to match


cdef struct Rng:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next_u64(Rng* r) noexcept nogil:
    cdef uint64_t result = _rotl(r.s0 + r.s3, 23) + r.s0
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = _rotl(r.s3, 45)
    return result


cdef inline uint64_t _randbelow(Rng* r, uint64_t bound) noexcept nogil:
    cdef uint64_t mask, v
    if bound <= 1:
        return 0
    mask = bound - 1
    mask |= mask >> 1
    mask |= mask >> 2
    mask |= mask >> 4
    mask |= mask >> 8
    mask |= mask >> 16
    mask |= mask >> 32
    while True:
        v = _next_u64(r) & mask
        if v < bound:
            return v


cdef inline uint64_t _subset_mask(Rng* r, int* buf, int m, int ell) noexcept nogil:
    # partial Fisher-Yates over buf[0..m); buf[t] is final once visited
    cdef int t, j, tmp
    cdef uint64_t mask = 0
    for t in range(ell):
        j = t + <int>_randbelow(r, <uint64_t>(m - t))
        tmp = buf[t]
        buf[t] = buf[j]
        buf[j] = tmp
        mask |= (<uint64_t>1) << buf[t]
    return mask


cdef inline uint64_t _draw_cmcs_mask(Rng* r, int n, int* buf) noexcept nogil:
    cdef int ell = <int>_randbelow(r, <uint64_t>(n + 1))
    cdef int t
    for t in range(n):
        buf[t] = t
    return _subset_mask(r, buf, n, ell)


cdef inline uint64_t _draw_excluding_mask(Rng* r, int n, int excl, int ell, int* buf) noexcept nogil:
    cdef int t, m = 0
    for t in range(n):
        if t != excl:
            buf[m] = t
            m += 1
    return _subset_mask(r, buf, m, ell)


cdef inline double _eval(double* tbl, uint64_t mask, uint64_t full, int64_t* charged) noexcept nogil:
    if mask != 0 and mask != full:
        charged[0] += 1
    return tbl[mask]


cdef inline void _record(double* snaps, int64_t* snap_used, int64_t* pos, int nmarks,
                         int64_t* marks, int64_t t, double* sums, int64_t* counts,
                         int n, bint force) noexcept nogil:
    cdef int i
    while pos[0] < nmarks and (marks[pos[0]] == t or force):
        for i in range(n):
            snaps[pos[0] * n + i] = sums[i] / counts[i] if counts[i] > 0 else 0.0
        snap_used[pos[0]] = t
        pos[0] += 1


def run_fixed_budget(int alg, double[::1] table, int n, long long budget,
                     state, int64_t[::1] marks):
    """Run one fixed-budget sampling loop on a dense worth table.

    Returns (sums, counts, t, charged, snaps, snap_used, state_out); see
    ``_pykernels.run_fixed_budget`` for the semantics.
    """
    if n < 1 or n > 25:
        raise ValueError(f"compiled kernels support 1 <= n <= 25, got {n}")
    if (<long long>1 << n) != table.shape[0]:
        raise ValueError("table length must be 2**n")
    if alg < 0 or alg > 4:
        raise ValueError(f"unknown algorithm id {alg}")

    cdef Rng rng
    rng.s0 = <uint64_t>(state[0])
    rng.s1 = <uint64_t>(state[1])
    rng.s2 = <uint64_t>(state[2])
    rng.s3 = <uint64_t>(state[3])

    cdef int nmarks = marks.shape[0]
    sums_arr = np.zeros(n, dtype=np.float64)
    counts_arr = np.zeros(n, dtype=np.int64)
    snaps_arr = np.zeros((nmarks, n), dtype=np.float64)
    snap_used_arr = np.zeros(nmarks, dtype=np.int64)
    cdef double[::1] sums_mv = sums_arr
    cdef int64_t[::1] counts_mv = counts_arr
    cdef double[:, ::1] snaps_mv = snaps_arr
    cdef int64_t[::1] snap_used_mv = snap_used_arr

    cdef double* sums = &sums_mv[0] if n else NULL
    cdef int64_t* counts = &counts_mv[0] if n else NULL
    cdef double* snaps = &snaps_mv[0, 0] if nmarks else NULL
    cdef int64_t* snap_used = &snap_used_mv[0] if nmarks else NULL
    cdef int64_t* marks_p = &marks[0] if nmarks else NULL
    cdef double* tbl = &table[0]

    cdef uint64_t full = (<uint64_t>1 << n) - 1
    cdef int64_t t = 0, charged = 0, pos = 0
    cdef int64_t T = budget
    cdef int buf[25]
    cdef int perm[25]
    cdef uint64_t s_mask, b, prefix
    cdef double v, w, d, prev, cur, hi, lo, base, joined
    cdef int i, j, tmp, ell
    cdef int64_t rounds, m

    with nogil:
        _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)

        if alg == 3:  # cmcs: complete rounds, shared worth reused
            rounds = T // (n + 1)
            for m in range(rounds):
                s_mask = _draw_cmcs_mask(&rng, n, buf)
                v = _eval(tbl, s_mask, full, &charged)
                t += 1
                _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)
                for i in range(n):
                    b = (<uint64_t>1) << i
                    if s_mask & b:
                        d = v - _eval(tbl, s_mask & ~b, full, &charged)
                    else:
                        d = _eval(tbl, s_mask | b, full, &charged) - v
                    t += 1
                    sums[i] += d
                    counts[i] += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)

        elif alg == 2:  # identical: shared coalition, two fresh accesses per player
            while t + 2 <= T:
                s_mask = _draw_cmcs_mask(&rng, n, buf)
                for i in range(n):
                    if t + 2 > T:
                        break
                    b = (<uint64_t>1) << i
                    hi = _eval(tbl, s_mask | b, full, &charged)
                    t += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)
                    lo = _eval(tbl, s_mask & ~b, full, &charged)
                    t += 1
                    sums[i] += hi - lo
                    counts[i] += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)

        elif alg == 0:  # independent: per-player marginal-law coalitions
            while t + 2 <= T:
                for i in range(n):
                    if t + 2 > T:
                        break
                    ell = <int>_randbelow(&rng, <uint64_t>n)
                    s_mask = _draw_excluding_mask(&rng, n, i, ell, buf)
                    base = _eval(tbl, s_mask, full, &charged)
                    t += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)
                    joined = _eval(tbl, s_mask | ((<uint64_t>1) << i), full, &charged)
                    t += 1
                    sums[i] += joined - base
                    counts[i] += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)

        elif alg == 1:  # same_length: one shared size per round
            while t + 2 <= T:
                ell = <int>_randbelow(&rng, <uint64_t>n)
                for i in range(n):
                    if t + 2 > T:
                        break
                    s_mask = _draw_excluding_mask(&rng, n, i, ell, buf)
                    base = _eval(tbl, s_mask, full, &charged)
                    t += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)
                    joined = _eval(tbl, s_mask | ((<uint64_t>1) << i), full, &charged)
                    t += 1
                    sums[i] += joined - base
                    counts[i] += 1
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)

        elif alg == 4:  # permutation walk with prefix reuse
            while t + 1 <= T:
                for i in range(n):
                    perm[i] = i
                for i in range(n):
                    j = i + <int>_randbelow(&rng, <uint64_t>(n - i))
                    tmp = perm[i]
                    perm[i] = perm[j]
                    perm[j] = tmp
                prefix = 0
                prev = 0.0
                for j in range(n):
                    if t + 1 > T:
                        break
                    i = perm[j]
                    prefix |= (<uint64_t>1) << i
                    cur = _eval(tbl, prefix, full, &charged)
                    t += 1
                    sums[i] += cur - prev
                    counts[i] += 1
                    prev = cur
                    _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, False)

        # unreached marks record the final state
        _record(snaps, snap_used, &pos, nmarks, marks_p, t, sums, counts, n, True)

    state_out = (int(rng.s0), int(rng.s1), int(rng.s2), int(rng.s3))
    return sums_arr, counts_arr, int(t), int(charged), snaps_arr, snap_used_arr, state_out
