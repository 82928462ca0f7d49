"""The fifteen NIST SP 800-22 statistical tests.

Every test takes a 1-D array of 0/1 values and returns a list of p-values
(one per sub-statistic; most tests have one). Under-length input raises
:class:`InputSizeError`. The random-excursion tests raise
:class:`InsufficientCycles` when the walk has too few zero crossings, which
the battery treats as "sequence not applicable".
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import norm

from ..timetag import as_bits
from . import _kernels


class InputSizeError(ValueError):
    pass


class InsufficientCycles(Exception):
    def __init__(self, cycles: int, required: float):
        super().__init__(f"{cycles} cycles, need {required:g}")
        self.cycles = cycles
        self.required = required


def _require(x: np.ndarray, minimum: int, test: str) -> None:
    if x.size < minimum:
        raise InputSizeError(f"{test} needs at least {minimum} bits, got {x.size}")


def _pm1(x: np.ndarray) -> np.ndarray:
    return 2 * x.astype(np.int64) - 1


def _windows(x: np.ndarray, m: int, wrap: bool) -> np.ndarray:
    """Integer value of every m-bit window, MSB first."""
    if wrap:
        x = np.concatenate((x, x[: m - 1]))
    count = x.size - m + 1
    v = np.zeros(count, np.int64)
    for k in range(m):
        v = (v << 1) | x[k:k + count]
    return v


# -- 1 ----------------------------------------------------------------------
def frequency(bits) -> list[float]:
    x = as_bits(bits)
    _require(x, 100, "frequency")
    s = abs(int(np.sum(_pm1(x))))
    return [float(erfc(s / math.sqrt(x.size) / math.sqrt(2)))]


# -- 2 ----------------------------------------------------------------------
def block_frequency(bits, block_size: int = 128) -> list[float]:
    x = as_bits(bits)
    _require(x, 100, "block frequency")
    nblocks = x.size // block_size
    if nblocks == 0:
        raise InputSizeError(f"block frequency needs at least {block_size} bits")
    pi = x[: nblocks * block_size].reshape(nblocks, block_size).sum(axis=1) / block_size
    chi2 = 4.0 * block_size * np.sum((pi - 0.5) ** 2)
    return [float(gammaincc(nblocks / 2.0, chi2 / 2.0))]


# -- 3 ----------------------------------------------------------------------
def _cusum_p(z: int, n: int) -> float:
    sq = math.sqrt(n)
    k1 = np.arange(math.trunc((-n / z + 1) / 4), math.trunc((n / z - 1) / 4) + 1)
    k2 = np.arange(math.trunc((-n / z - 3) / 4), math.trunc((n / z - 1) / 4) + 1)
    s1 = np.sum(norm.cdf((4 * k1 + 1) * z / sq) - norm.cdf((4 * k1 - 1) * z / sq))
    s2 = np.sum(norm.cdf((4 * k2 + 3) * z / sq) - norm.cdf((4 * k2 + 1) * z / sq))
    return float(min(1.0, max(0.0, 1.0 - s1 + s2)))


def cumulative_sums(bits) -> list[float]:
    """Forward and backward cumulative-sums p-values."""
    x = as_bits(bits)
    _require(x, 100, "cumulative sums")
    n = x.size
    walk = np.cumsum(_pm1(x))
    z_fwd = int(np.max(np.abs(walk)))
    # backward partial sums are S_n - S_k for k = 0..n-1
    back = walk[-1] - np.concatenate(([0], walk[:-1]))
    z_bwd = int(np.max(np.abs(back)))
    return [_cusum_p(z_fwd, n), _cusum_p(z_bwd, n)]


# -- 4 ----------------------------------------------------------------------
def runs(bits) -> list[float]:
    x = as_bits(bits)
    _require(x, 100, "runs")
    n = x.size
    pi = np.count_nonzero(x) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return [0.0]
    v = 1 + int(np.count_nonzero(x[1:] != x[:-1]))
    num = abs(v - 2.0 * n * pi * (1 - pi))
    return [float(erfc(num / (2.0 * math.sqrt(2.0 * n) * pi * (1 - pi))))]


# -- 5 ----------------------------------------------------------------------
# (block length, class lower edge, class upper edge, class probabilities)
_LONGEST_RUN = (
    (10000, 10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (128, 4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (8, 1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
)
_LONGEST_RUN_MIN_N = {10000: 750000, 128: 6272, 8: 128}


def longest_run_parameters(n: int):
    for block, lo, hi, probs in _LONGEST_RUN:
        if n >= _LONGEST_RUN_MIN_N[block]:
            return block, lo, hi, np.array(probs)
    raise InputSizeError(f"longest run needs at least 128 bits, got {n}")


def longest_run(bits) -> list[float]:
    x = as_bits(bits)
    _require(x, 128, "longest run")
    block, lo, hi, probs = longest_run_parameters(x.size)
    nblocks = x.size // block
    blocks = x[: nblocks * block].reshape(nblocks, block)
    longest = _longest_ones(blocks)
    classes = np.clip(longest, lo, hi) - lo
    nu = np.bincount(classes, minlength=len(probs))
    chi2 = np.sum((nu - nblocks * probs) ** 2 / (nblocks * probs))
    return [float(gammaincc((len(probs) - 1) / 2.0, chi2 / 2.0))]


def _longest_ones(blocks: np.ndarray) -> np.ndarray:
    nblocks, width = blocks.shape
    padded = np.zeros((nblocks, width + 2), np.int8)
    padded[:, 1:-1] = blocks
    d = np.diff(padded, axis=1)
    r_start, c_start = np.nonzero(d == 1)
    _, c_end = np.nonzero(d == -1)
    out = np.zeros(nblocks, np.int64)
    np.maximum.at(out, r_start, c_end - c_start)
    return out


# -- 6 ----------------------------------------------------------------------
def _rank_probability(r: int, rows: int = 32, cols: int = 32) -> float:
    prod = 1.0
    for i in range(r):
        prod *= (1 - 2.0 ** (i - rows)) * (1 - 2.0 ** (i - cols)) / (1 - 2.0 ** (i - r))
    return 2.0 ** (r * (rows + cols - r) - rows * cols) * prod


def binary_matrix_rank(bits) -> list[float]:
    x = as_bits(bits)
    _require(x, 38912, "binary matrix rank")
    nmat = x.size // 1024
    rows = np.packbits(x[: nmat * 1024].reshape(nmat * 32, 32), axis=1)
    rows = rows.view(">u4").astype(np.uint32).reshape(nmat, 32)
    ranks = _kernels.gf2_ranks(rows)
    p32 = _rank_probability(32)
    p31 = _rank_probability(31)
    probs = np.array([p32, p31, 1.0 - p32 - p31])
    observed = np.array([np.count_nonzero(ranks == 32), np.count_nonzero(ranks == 31), 0])
    observed[2] = nmat - observed[0] - observed[1]
    chi2 = np.sum((observed - nmat * probs) ** 2 / (nmat * probs))
    return [float(math.exp(-chi2 / 2.0))]


# -- 7 ----------------------------------------------------------------------
def spectral(bits) -> list[float]:
    """Discrete Fourier transform (spectral) test."""
    x = as_bits(bits)
    _require(x, 1000, "spectral")
    n = x.size
    mod = np.abs(np.fft.fft(_pm1(x).astype(np.float64))[: n // 2])
    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = np.count_nonzero(mod < threshold)
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return [float(erfc(abs(d) / math.sqrt(2)))]


# -- 8 ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def aperiodic_templates(m: int) -> tuple[int, ...]:
    """All m-bit templates with no proper self-overlap, in increasing order."""
    out = []
    for t in range(1 << m):
        s = format(t, f"0{m}b")
        if all(s[k:] != s[: m - k] for k in range(1, m)):
            out.append(t)
    return tuple(out)


def non_overlapping_template(bits, m: int = 9, nblocks: int = 8,
                             templates=None) -> list[float]:
    """One p-value per aperiodic template (148 for m = 9)."""
    x = as_bits(bits)
    block_len = x.size // nblocks
    if block_len < m:
        raise InputSizeError(f"non-overlapping template needs at least {nblocks * m} bits")
    if templates is None:
        templates = aperiodic_templates(m)
    w = _windows(x[: nblocks * block_len], m, wrap=False)
    order = np.argsort(w, kind="stable")
    sorted_w = w[order]
    lo = np.searchsorted(sorted_w, templates, side="left")
    hi = np.searchsorted(sorted_w, templates, side="right")
    mean = (block_len - m + 1) / 2.0 ** m
    var = block_len * (1.0 / 2.0 ** m - (2.0 * m - 1.0) / 2.0 ** (2 * m))
    pvals = []
    for a, b in zip(lo, hi):
        counts = _kernels.non_overlapping_counts(order[a:b], block_len, m, nblocks)
        chi2 = np.sum((counts - mean) ** 2) / var
        pvals.append(float(gammaincc(nblocks / 2.0, chi2 / 2.0)))
    return pvals


# -- 9 ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def overlapping_template_probabilities(m: int = 9, block_len: int = 1032,
                                       classes: int = 6) -> tuple[float, ...]:
    """Exact distribution of overlapping all-ones matches in a random block.

    Dynamic programme over (trailing run of ones, matches so far), with the
    last class absorbing ``>= classes - 1`` matches.
    """
    cap = classes - 1
    # state[r, c]: probability of trailing run r (capped at m) with c matches
    state = np.zeros((m + 1, cap + 1))
    state[0, 0] = 1.0
    for _ in range(block_len):
        new = np.zeros_like(state)
        new[0] += 0.5 * state.sum(axis=0)
        for r in range(m + 1):
            nr = min(r + 1, m)
            if nr == m:
                new[nr, 1:] += 0.5 * state[r, :-1]
                new[nr, cap] += 0.5 * state[r, cap]
            else:
                new[nr] += 0.5 * state[r]
        state = new
    return tuple(state.sum(axis=0))


def overlapping_template(bits, m: int = 9, block_len: int = 1032) -> list[float]:
    x = as_bits(bits)
    _require(x, 1_000_000, "overlapping template")
    nblocks = x.size // block_len
    probs = np.array(overlapping_template_probabilities(m, block_len))
    hit = (_windows(x[: nblocks * block_len], m, wrap=False) == (1 << m) - 1)
    hit = np.concatenate((hit, np.zeros(m - 1, bool))).reshape(nblocks, block_len)
    per_block = hit[:, : block_len - m + 1].sum(axis=1)
    nu = np.bincount(np.minimum(per_block, len(probs) - 1), minlength=len(probs))
    chi2 = np.sum((nu - nblocks * probs) ** 2 / (nblocks * probs))
    return [float(gammaincc((len(probs) - 1) / 2.0, chi2 / 2.0))]


# -- 10 ---------------------------------------------------------------------
_UNIVERSAL_MIN_N = (387840, 904960, 2068480, 4654080, 10342400, 22753280,
                    49643520, 107560960, 231669760, 496435200, 1059061760)
_UNIVERSAL_EXPECTED = {6: 5.2177052, 7: 6.1962507, 8: 7.1836656, 9: 8.1764248,
                       10: 9.1723243, 11: 10.170032, 12: 11.168765, 13: 12.168070,
                       14: 13.167693, 15: 14.167488, 16: 15.167379}
_UNIVERSAL_VARIANCE = {6: 2.954, 7: 3.125, 8: 3.238, 9: 3.311, 10: 3.356, 11: 3.384,
                       12: 3.401, 13: 3.410, 14: 3.416, 15: 3.419, 16: 3.421}


def universal_block_length(n: int) -> int:
    if n < _UNIVERSAL_MIN_N[0]:
        raise InputSizeError(f"universal needs at least {_UNIVERSAL_MIN_N[0]} bits, got {n}")
    return 5 + int(np.searchsorted(_UNIVERSAL_MIN_N, n, side="right"))


def universal(bits) -> list[float]:
    """Maurer's universal statistical test."""
    x = as_bits(bits)
    L = universal_block_length(x.size)
    Q = 10 * 2 ** L
    K = x.size // L - Q
    nblk = Q + K
    weights = 1 << np.arange(L - 1, -1, -1, dtype=np.int64)
    values = x[: nblk * L].reshape(nblk, L).astype(np.int64) @ weights
    fn = _kernels.universal_sum(values, L, Q, K) / K
    c = 0.7 - 0.8 / L + (4 + 32 / L) * K ** (-3 / L) / 15
    sigma = c * math.sqrt(_UNIVERSAL_VARIANCE[L] / K)
    return [float(erfc(abs(fn - _UNIVERSAL_EXPECTED[L]) / (math.sqrt(2) * sigma)))]


# -- 11 ---------------------------------------------------------------------
def _phi(x: np.ndarray, m: int) -> float:
    if m == 0:
        return 0.0
    counts = np.bincount(_windows(x, m, wrap=True), minlength=1 << m)
    c = counts[counts > 0] / x.size
    return float(np.sum(c * np.log(c)))


def approximate_entropy(bits, m: int = 10) -> list[float]:
    x = as_bits(bits)
    _require(x, m + 2, "approximate entropy")
    apen = _phi(x, m) - _phi(x, m + 1)
    chi2 = 2.0 * x.size * (math.log(2) - apen)
    return [float(gammaincc(2.0 ** (m - 1), chi2 / 2.0))]


# -- 12, 13 -----------------------------------------------------------------
def _excursion_walk(x: np.ndarray):
    walk = np.cumsum(_pm1(x))
    zeros = walk == 0
    cycles = int(np.count_nonzero(zeros)) + (1 if walk[-1] != 0 else 0)
    required = max(0.005 * math.sqrt(x.size), 500)
    if cycles < required:
        raise InsufficientCycles(cycles, required)
    # a step belongs to the cycle counted by zeros strictly before it
    cycle_id = np.concatenate(([0], np.cumsum(zeros)[:-1]))
    return walk, cycle_id, cycles


def _excursion_probabilities(x: int) -> np.ndarray:
    a = abs(x)
    q = 1 - 1 / (2 * a)
    probs = [q] + [1 / (4 * a * a) * q ** (k - 1) for k in range(1, 5)] + [1 / (2 * a) * q ** 4]
    return np.array(probs)


RANDOM_EXCURSION_STATES = (-4, -3, -2, -1, 1, 2, 3, 4)
VARIANT_STATES = tuple(s for s in range(-9, 10) if s)


def random_excursions(bits) -> list[float]:
    """Eight p-values, for states -4..-1, 1..4."""
    x = as_bits(bits)
    _require(x, 1_000_000, "random excursions")
    walk, cycle_id, J = _excursion_walk(x)
    pvals = []
    for state in RANDOM_EXCURSION_STATES:
        visits = np.bincount(cycle_id[walk == state], minlength=J)
        nu = np.bincount(np.minimum(visits, 5), minlength=6)
        probs = _excursion_probabilities(state)
        chi2 = np.sum((nu - J * probs) ** 2 / (J * probs))
        pvals.append(float(gammaincc(2.5, chi2 / 2.0)))
    return pvals


def random_excursions_variant(bits) -> list[float]:
    """Eighteen p-values, for states -9..-1, 1..9."""
    x = as_bits(bits)
    _require(x, 1_000_000, "random excursions variant")
    walk, _, J = _excursion_walk(x)
    clipped = walk[np.abs(walk) <= 9] + 9
    totals = np.bincount(clipped, minlength=19)
    pvals = []
    for state in VARIANT_STATES:
        xi = totals[state + 9]
        pvals.append(float(erfc(abs(xi - J) / math.sqrt(2.0 * J * (4 * abs(state) - 2)))))
    return pvals


# -- 14 ---------------------------------------------------------------------
def _psi2(x: np.ndarray, m: int) -> float:
    if m <= 0:
        return 0.0
    counts = np.bincount(_windows(x, m, wrap=True), minlength=1 << m).astype(np.float64)
    return float(np.dot(counts, counts) * 2.0 ** m / x.size - x.size)


def serial(bits, m: int = 16) -> list[float]:
    x = as_bits(bits)
    _require(x, m, "serial")
    if m < 2:
        raise ValueError("serial test needs m >= 2")
    p0, p1, p2 = _psi2(x, m), _psi2(x, m - 1), _psi2(x, m - 2)
    d1 = p0 - p1
    d2 = p0 - 2 * p1 + p2
    return [float(gammaincc(2.0 ** (m - 2), d1 / 2.0)),
            float(gammaincc(2.0 ** (m - 3), d2 / 2.0))]


# -- 15 ---------------------------------------------------------------------
# NIST's published table. The first entry is printed as 0.01047 rather than
# 1/96 = 0.010417; the published reference p-values depend on it.
LINEAR_COMPLEXITY_PROBS = (0.01047, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833)


def linear_complexity(bits, block_size: int = 500) -> list[float]:
    x = as_bits(bits)
    _require(x, 1_000_000, "linear complexity")
    M = block_size
    nblocks = x.size // M
    L = _kernels.berlekamp_massey_blocks(np.ascontiguousarray(x[: nblocks * M]), M)
    mu = M / 2.0 + (9.0 + (-1) ** (M + 1)) / 36.0 - (M / 3.0 + 2.0 / 9.0) / 2.0 ** M
    T = (-1) ** M * (L - mu) + 2.0 / 9.0
    classes = np.digitize(T, [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5], right=True)
    nu = np.bincount(classes, minlength=7)
    probs = np.array(LINEAR_COMPLEXITY_PROBS)
    chi2 = np.sum((nu - nblocks * probs) ** 2 / (nblocks * probs))
    return [float(gammaincc(3.0, chi2 / 2.0))]


def linear_complexity_of(bits) -> int:
    """Berlekamp-Massey linear complexity of a single sequence."""
    x = np.ascontiguousarray(as_bits(bits))
    return int(_kernels.berlekamp_massey_blocks(x, x.size)[0])
