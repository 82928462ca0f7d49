"""Lossy plasmonic beamsplitter.

Single excitations are converted to surface plasmons at the input grating,
decay exponentially along the lead-in waveguide and are then transmitted
(bit 0), reflected (bit 1) or lost at the central grating. Losses after the
split are symmetric between the arms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

NOMINAL_GRATING_EFFICIENCY = 0.12
NOMINAL_LEAD_IN_LENGTH = 4.5  # um
NOMINAL_DECAY_LENGTH = 8.5  # um
MEASURED_DETECTED_RATE_PER_DETECTOR = 1.2e6
MEASURED_RAW_ONES_FRACTION = 0.5023

SINGLE_EXCITATION_LIMIT = 1e-2
DEAD_TIME_LIMIT = 1e-1

_SUM_TOL = 1e-12


class SplitOutcome(enum.IntEnum):
    TransmittedTo0 = 0
    ReflectedTo1 = 1
    Lost = 2


@dataclass(frozen=True)
class ChannelParams:
    """Scalar loss and splitting probabilities of the beamsplitter.

    Lengths are in micrometres. ``transmit_prob + reflect_prob + loss_prob``
    must equal one. ``output_survival`` lumps post-split propagation,
    out-coupling and collection, and is applied equally to both arms.
    """

    grating_efficiency: float = NOMINAL_GRATING_EFFICIENCY
    lead_in_length: float = NOMINAL_LEAD_IN_LENGTH
    decay_length: float = NOMINAL_DECAY_LENGTH
    transmit_prob: float = 0.35
    reflect_prob: float = 0.35
    loss_prob: float = 0.30
    output_survival: float = 1.0

    def __post_init__(self):
        for name in ("grating_efficiency", "transmit_prob", "reflect_prob",
                     "loss_prob", "output_survival"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        total = self.transmit_prob + self.reflect_prob + self.loss_prob
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"transmit + reflect + loss must be 1, got {total!r}")
        if not self.decay_length > 0:
            raise ValueError("decay_length must be positive")
        if self.lead_in_length < 0:
            raise ValueError("lead_in_length must be non-negative")

    @classmethod
    def symmetric(cls, split_loss: float = 0.30, ones_fraction: float = 0.5,
                  **kwargs) -> "ChannelParams":
        """Build params from a split loss and the reflected share ``R / (T + R)``.

        ``ones_fraction`` is the asymmetry knob; 0.5 is a balanced splitter.
        """
        kept = 1.0 - split_loss
        reflect = kept * ones_fraction
        transmit = 1.0 - split_loss - reflect
        return cls(transmit_prob=transmit, reflect_prob=reflect,
                   loss_prob=split_loss, **kwargs)

    @property
    def ones_fraction(self) -> float:
        """Probability of bit 1 given that some detector fires."""
        kept = self.transmit_prob + self.reflect_prob
        return self.reflect_prob / kept if kept > 0 else math.nan

    @property
    def outcome_probabilities(self) -> tuple[float, float, float]:
        t = self.transmit_prob * self.output_survival
        r = self.reflect_prob * self.output_survival
        return t, r, max(0.0, 1.0 - t - r)


@dataclass(frozen=True)
class RegimeReport:
    excitation_ratio: float
    dead_time_ratio: float
    single_excitation_ok: bool
    dead_time_ok: bool

    @property
    def ok(self) -> bool:
        return self.single_excitation_ok and self.dead_time_ok

    def as_dict(self) -> dict:
        return {
            "excitation_ratio": self.excitation_ratio,
            "dead_time_ratio": self.dead_time_ratio,
            "single_excitation_ok": self.single_excitation_ok,
            "dead_time_ok": self.dead_time_ok,
        }


def propagation_transmission(length: float, decay_length: float) -> float:
    """Surviving fraction ``exp(-length / decay_length)`` after propagation."""
    if not decay_length > 0:
        raise ValueError(f"decay_length must be positive, got {decay_length}")
    if length < 0:
        raise ValueError(f"length must be non-negative, got {length}")
    return math.exp(-length / decay_length)


def input_survival_probability(params: ChannelParams) -> float:
    return params.grating_efficiency * propagation_transmission(
        params.lead_in_length, params.decay_length)


def detection_probability(params: ChannelParams) -> float:
    """Probability that an excitation reaching the splitter leaves through an arm."""
    t, r, _ = params.outcome_probabilities
    return t + r


def split_excitation(params: ChannelParams, rng: np.random.Generator) -> SplitOutcome:
    """Sample the outcome of one excitation arriving at the splitter."""
    return SplitOutcome(int(split_excitations(params, 1, rng)[0]))


def split_excitations(params: ChannelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`split_excitation`; returns ``SplitOutcome`` codes as uint8."""
    t, r, _ = params.outcome_probabilities
    u = rng.random(n)
    out = np.full(n, SplitOutcome.Lost, dtype=np.uint8)
    out[u < t + r] = SplitOutcome.ReflectedTo1
    out[u < t] = SplitOutcome.TransmittedTo0
    return out


def check_operating_regime(arrival_rate: float, coherence_time: float,
                           expected_detection_rate_per_detector: float,
                           dead_time: float) -> RegimeReport:
    """Check the single-excitation and dead-time conditions.

    Both products must be small: rate times coherence time below 1e-2 and
    per-detector count rate times dead time below 1e-1.
    """
    for name, value in (("arrival_rate", arrival_rate), ("coherence_time", coherence_time),
                        ("expected_detection_rate_per_detector",
                         expected_detection_rate_per_detector),
                        ("dead_time", dead_time)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    excitation = arrival_rate * coherence_time
    dead = expected_detection_rate_per_detector * dead_time
    return RegimeReport(
        excitation_ratio=excitation,
        dead_time_ratio=dead,
        single_excitation_ok=excitation < SINGLE_EXCITATION_LIMIT,
        dead_time_ok=dead < DEAD_TIME_LIMIT,
    )
