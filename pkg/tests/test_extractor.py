import itertools
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plasmonrng.extractor import (ExtractorConfig, chunk_seed, extract_pipeline, peres, shuffle,
                                  von_neumann)


def reference_vn(x):
    return [a for a, b in zip(x[0::2], x[1::2]) if a != b]


def reference_peres(x, depth):
    """List-based transcription of the recursive definition."""
    if depth == 0 or len(x) < 2:
        return []
    pairs = list(zip(x[0::2], x[1::2]))
    u = [a ^ b for a, b in pairs]
    v = [a for a, b in pairs if a == b]
    out = [a for a, b in pairs if a != b]
    if depth == 1:
        return out
    return out + reference_peres(u, depth - 1) + reference_peres(v, depth - 1)


def analytic_yield(depth, p=0.5):
    """Expected output bits per input bit in the long-sequence limit."""
    if depth == 0:
        return 0.0
    q = 1 - p
    pxor = 2 * p * q
    pv = p * p + q * q
    # u has bias pxor, v has bias p^2 / (p^2 + q^2), both at half rate (v at pv/2)
    return (p * q + 0.5 * analytic_yield(depth - 1, pxor)
            + 0.5 * pv * analytic_yield(depth - 1, p * p / pv))


def test_von_neumann_examples():
    assert von_neumann([0, 1, 1, 0, 0, 0, 1, 1]).tolist() == [0, 1]
    assert von_neumann([1]).tolist() == []
    assert von_neumann([]).tolist() == []


def test_peres_examples():
    assert peres([0, 1], 1).tolist() == [0]
    assert peres([0, 0, 1, 1], 2).tolist() == [0]
    assert peres([1, 1, 1, 1], 16).tolist() == []
    assert peres([0, 1, 1, 0], 1).tolist() == von_neumann([0, 1, 1, 0]).tolist()
    with pytest.raises(ValueError):
        peres([0, 1], -1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=80), st.integers(0, 7))
def test_peres_matches_reference(bits, depth):
    assert peres(bits, depth).tolist() == reference_peres(bits, depth)
    assert von_neumann(bits).tolist() == reference_vn(bits)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=64))
def test_yield_is_monotone_in_depth(bits):
    lengths = [len(peres(bits, d)) for d in range(1, 9)]
    assert lengths == sorted(lengths)
    assert lengths[-1] <= len(bits) // 2 * 2


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5023, 0.7])
@pytest.mark.parametrize("depth", [1, 2, 16])
def test_outputs_of_each_length_are_equiprobable(p, depth):
    for n in range(1, 11):
        mass = defaultdict(float)
        for x in itertools.product((0, 1), repeat=n):
            ones = sum(x)
            mass[tuple(peres(list(x), depth).tolist())] += p ** ones * (1 - p) ** (n - ones)
        by_len = defaultdict(list)
        for out, m in mass.items():
            by_len[len(out)].append(m)
        for k, masses in by_len.items():
            if k == 0:
                continue
            assert len(masses) == 2 ** k
            assert max(masses) - min(masses) <= 1e-12 * max(masses)


def test_analytic_yield_recursion():
    assert analytic_yield(1) == pytest.approx(0.25)
    for d in range(1, 20):
        assert analytic_yield(d) == pytest.approx(1 - 0.75 ** d, abs=1e-12)
    assert analytic_yield(8) == pytest.approx(0.8999, abs=1e-4)


def test_measured_yield_matches_analytic(rng):
    x = rng.integers(0, 2, 2_400_000, dtype=np.uint8)
    for depth in (1, 4, 8):
        ratio = len(peres(x, depth)) / x.size
        assert ratio == pytest.approx(analytic_yield(depth), abs=2e-3)
    # at depth 16 the deepest branches hold only a few dozen bits, so the
    # finite-length yield sits a little below the asymptotic 0.990
    deep = len(peres(x, 16)) / x.size
    assert 0.98 < deep < analytic_yield(16)


def test_biased_source_yield_below_entropy(rng):
    p = 0.7
    x = (rng.random(1_000_000) < p).astype(np.uint8)
    h = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
    assert len(peres(x, 16)) / x.size < h
    assert len(peres(x, 6)) / x.size == pytest.approx(analytic_yield(6, p), abs=3e-3)


def test_shuffle_is_deterministic_permutation(rng):
    x = rng.integers(0, 2, 1000, dtype=np.uint8)
    a, b = shuffle(x, 7), shuffle(x, 7)
    assert np.array_equal(a, b) and a.sum() == x.sum()
    assert not np.array_equal(shuffle(x, 8), a)


def test_pipeline_chunks_and_report(rng):
    x = rng.integers(0, 2, 25_000, dtype=np.uint8)
    cfg = ExtractorConfig(recursion_depth_limit=16, shuffle_seed=3, chunk_size_bits=10_000)
    out, report = extract_pipeline(x, cfg)
    assert report.input_lengths == [10_000, 10_000, 5_000]
    assert sum(report.output_lengths) == len(out)
    assert report.chunk_seeds == [chunk_seed(3, i) for i in range(3)]
    manual = np.concatenate([peres(shuffle(x[i:i + 10_000], chunk_seed(3, i // 10_000)), 16)
                             for i in range(0, 25_000, 10_000)])
    assert np.array_equal(out.bits, manual)
    again, report2 = extract_pipeline(x, cfg)
    assert again == out and report2.as_dict() == report.as_dict()
    assert "throughput_bits_per_s" in report.as_dict(include_timing=True)


def test_pipeline_without_shuffle(rng):
    x = rng.integers(0, 2, 5000, dtype=np.uint8)
    out, report = extract_pipeline(x, ExtractorConfig(shuffle=False, chunk_size_bits=5000))
    assert np.array_equal(out.bits, peres(x, 16)) and report.chunk_seeds == []


def test_config_validation():
    with pytest.raises(ValueError):
        ExtractorConfig(recursion_depth_limit=0)
    with pytest.raises(ValueError):
        ExtractorConfig(chunk_size_bits=1)


def test_hand_traced_example():
    assert peres([0, 1, 1, 0], 2).tolist() == [0, 1]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=100), st.integers(1, 10))
def test_von_neumann_is_a_prefix(bits, depth):
    vn = von_neumann(bits).tolist()
    out = peres(bits, depth).tolist()
    assert out[: len(vn)] == vn
    assert len(vn) <= len(out) <= len(bits)
