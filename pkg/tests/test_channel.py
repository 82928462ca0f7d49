import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plasmonrng.channel import (ChannelParams, SplitOutcome, check_operating_regime,
                                detection_probability, input_survival_probability,
                                propagation_transmission, split_excitation, split_excitations)
from plasmonrng.config import PipelineConfig
from plasmonrng.detector import DetectorParams
from plasmonrng.simulate import simulate_bits
from plasmonrng.source import SourceParams


def test_propagation_examples():
    assert propagation_transmission(0.0, 8.5) == 1.0
    assert propagation_transmission(8.5, 8.5) == pytest.approx(math.exp(-1))
    assert propagation_transmission(4.5, 8.5) == pytest.approx(0.589, abs=1e-3)
    with pytest.raises(ValueError):
        propagation_transmission(1.0, 0.0)
    with pytest.raises(ValueError):
        propagation_transmission(-1.0, 8.5)


def test_input_survival_is_grating_times_propagation():
    p = ChannelParams()
    assert input_survival_probability(p) == pytest.approx(0.12 * math.exp(-4.5 / 8.5))


def test_probabilities_must_sum_to_one():
    with pytest.raises(ValueError):
        ChannelParams(transmit_prob=0.5, reflect_prob=0.5, loss_prob=0.1)
    with pytest.raises(ValueError):
        ChannelParams(output_survival=1.2)


def test_symmetric_constructor():
    p = ChannelParams.symmetric(split_loss=0.3, ones_fraction=0.5023)
    assert p.loss_prob == 0.3
    assert p.ones_fraction == pytest.approx(0.5023, abs=1e-12)
    assert p.transmit_prob + p.reflect_prob + p.loss_prob == pytest.approx(1.0, abs=1e-15)


def test_perfect_transmitter_always_gives_zero(rng):
    p = ChannelParams(transmit_prob=1.0, reflect_prob=0.0, loss_prob=0.0)
    assert split_excitation(p, rng) is SplitOutcome.TransmittedTo0
    assert np.all(split_excitations(p, 1000, rng) == SplitOutcome.TransmittedTo0)
    assert p.ones_fraction == 0.0


def test_total_loss_never_detects(rng):
    p = ChannelParams(transmit_prob=0.0, reflect_prob=0.0, loss_prob=1.0)
    assert np.all(split_excitations(p, 1000, rng) == SplitOutcome.Lost)
    assert detection_probability(p) == 0.0
    assert math.isnan(p.ones_fraction)


def test_split_frequencies(rng):
    p = ChannelParams(transmit_prob=0.2, reflect_prob=0.5, loss_prob=0.3)
    n = 400_000
    counts = np.bincount(split_excitations(p, n, rng), minlength=3) / n
    for got, want in zip(counts, (0.2, 0.5, 0.3)):
        assert abs(got - want) < 5 * math.sqrt(want * (1 - want) / n)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0, 1), r=st.floats(0, 1), surv=st.floats(0, 1))
def test_outcome_probabilities_are_a_distribution(t, r, surv):
    if t + r > 1:
        t, r = t / (t + r), r / (t + r)
    p = ChannelParams(transmit_prob=t, reflect_prob=r, loss_prob=max(0.0, 1 - t - r),
                      output_survival=surv)
    probs = p.outcome_probabilities
    assert all(0 <= v <= 1 for v in probs)
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)


def test_regime_check():
    ok = check_operating_regime(1e9, 3.85e-14, 1.2e6, 24e-9)
    assert ok.ok and ok.excitation_ratio == pytest.approx(3.85e-5)
    assert ok.dead_time_ratio == pytest.approx(0.0288)
    bad = check_operating_regime(1e12, 3.85e-14, 1e7, 24e-9)
    assert not bad.single_excitation_ok and not bad.dead_time_ok
    with pytest.raises(ValueError):
        check_operating_regime(0.0, 1e-14, 1e6, 24e-9)


def _explicit_config(survival, seed):
    return PipelineConfig(
        source=SourceParams(power_at_reference=2e-12, transmission_factor=1.0),
        channel=ChannelParams.symmetric(split_loss=0.3, ones_fraction=0.7,
                                        output_survival=survival),
        detector=DetectorParams(dead_time=0.0),
        duration_s=1.0, master_seed=seed, method="explicit")


def test_post_selection_does_not_depend_on_output_survival():
    """Symmetric post-split losses cancel in P(1 | detection)."""
    fractions = []
    for survival in (1.0, 0.4, 0.1):
        bits = simulate_bits(_explicit_config(survival, seed=5))
        assert len(bits) > 20_000
        fractions.append((bits.mean(), len(bits)))
    for mean, n in fractions:
        assert abs(mean - 0.7) < 5 * math.sqrt(0.21 / n)
