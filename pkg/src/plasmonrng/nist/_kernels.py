"""Compiled inner loops for the SP 800-22 tests."""

import numba
import numpy as np


@numba.njit(cache=True)
def gf2_ranks(rows):
    """Rank over GF(2) of each 32x32 matrix; ``rows`` has shape (N, 32) uint32."""
    nmat = rows.shape[0]
    out = np.empty(nmat, np.int64)
    for k in range(nmat):
        r = rows[k].copy()
        rank = 0
        for col in range(31, -1, -1):
            bit = np.uint32(1) << np.uint32(col)
            pivot = -1
            for i in range(rank, 32):
                if r[i] & bit:
                    pivot = i
                    break
            if pivot < 0:
                continue
            tmp = r[rank]
            r[rank] = r[pivot]
            r[pivot] = tmp
            for i in range(32):
                if i != rank and (r[i] & bit):
                    r[i] ^= r[rank]
            rank += 1
        out[k] = rank
    return out


@numba.njit(cache=True)
def berlekamp_massey_blocks(bits, block):
    """Linear complexity of each consecutive ``block``-bit slice of ``bits``."""
    nblocks = bits.shape[0] // block
    out = np.empty(nblocks, np.int64)
    c = np.zeros(block + 1, np.uint8)
    b = np.zeros(block + 1, np.uint8)
    t = np.zeros(block + 1, np.uint8)
    for k in range(nblocks):
        s = bits[k * block:(k + 1) * block]
        c[:] = 0
        b[:] = 0
        c[0] = 1
        b[0] = 1
        L = 0
        m = -1
        for n in range(block):
            d = s[n]
            for i in range(1, L + 1):
                d ^= c[i] & s[n - i]
            if d:
                t[:] = c
                shift = n - m
                for i in range(0, block + 1 - shift):
                    c[i + shift] ^= b[i]
                if 2 * L <= n:
                    L = n + 1 - L
                    m = n
                    b[:] = t
        out[k] = L
    return out


@numba.njit(cache=True)
def non_overlapping_counts(positions, block_len, m, nblocks):
    """Greedy non-overlapping match counts per block from sorted match positions."""
    counts = np.zeros(nblocks, np.int64)
    next_free = -1
    for p in positions:
        j = p // block_len
        if j >= nblocks:
            break
        if p - j * block_len > block_len - m:
            continue
        if p < next_free:
            continue
        counts[j] += 1
        next_free = p + m
    return counts


@numba.njit(cache=True)
def universal_sum(values, L, Q, K):
    table = np.zeros(1 << L, np.int64)
    for i in range(1, Q + 1):
        table[values[i - 1]] = i
    total = 0.0
    for i in range(Q + 1, Q + K + 1):
        v = values[i - 1]
        total += np.log2(i - table[v])
        table[v] = i
    return total
