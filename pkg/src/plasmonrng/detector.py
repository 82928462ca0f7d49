"""Single-photon avalanche diode response.

Turns labelled arrival streams into detection events: efficiency thinning,
non-paralyzable dead time with an independent clock per channel, dark
counts, single-generation afterpulsing, and timestamp quantisation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .source import poisson_times
from .timetag import TimeTags

NOMINAL_DEAD_TIME = 24e-9
NOMINAL_TICK = 25e-12

_TICK_LIMIT = 2.0**64


class Origin(enum.IntEnum):
    Signal = 0
    Dark = 1
    Afterpulse = 2


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = 1.0
    dead_time: float = NOMINAL_DEAD_TIME
    dark_rate: float = 0.0
    afterpulse_prob: float = 0.0
    afterpulse_delay: float = 50e-9
    tick_resolution: float = NOMINAL_TICK

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if not 0.0 <= self.afterpulse_prob <= 1.0:
            raise ValueError("afterpulse_prob must lie in [0, 1]")
        if self.dead_time < 0 or self.dark_rate < 0 or self.afterpulse_delay < 0:
            raise ValueError("dead_time, dark_rate and afterpulse_delay must be non-negative")
        if not self.tick_resolution > 0:
            raise ValueError("tick_resolution must be positive")


@dataclass
class DetectionEvents:
    """Columnar list of pre-quantisation detection events."""

    times: np.ndarray
    channels: np.ndarray
    origins: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.channels = np.asarray(self.channels, dtype=np.uint8)
        if np.ndim(self.origins) == 0:
            self.origins = np.full(len(self.times), self.origins, dtype=np.uint8)
        self.origins = np.asarray(self.origins, dtype=np.uint8)
        if not len(self.times) == len(self.channels) == len(self.origins):
            raise ValueError("times, channels and origins must have equal length")
        if len(self.channels) and self.channels.max() > 1:
            raise ValueError("channel must be 0 or 1")
        if len(self.times) and self.times.min() < 0:
            raise ValueError("event times must be non-negative")

    @classmethod
    def empty(cls) -> "DetectionEvents":
        return cls(np.empty(0), np.empty(0, np.uint8), np.empty(0, np.uint8))

    def __len__(self) -> int:
        return len(self.times)

    def take(self, index) -> "DetectionEvents":
        return DetectionEvents(self.times[index], self.channels[index], self.origins[index])

    def channel(self, ch: int) -> "DetectionEvents":
        return self.take(self.channels == ch)


def merge(*streams: DetectionEvents) -> DetectionEvents:
    """Merge event lists into one time-ordered list (stable on ties)."""
    times = np.concatenate([s.times for s in streams])
    order = np.argsort(times, kind="stable")
    return DetectionEvents(
        times[order],
        np.concatenate([s.channels for s in streams])[order],
        np.concatenate([s.origins for s in streams])[order],
    )


@numba.njit(cache=True)
def _dead_time_mask(times, channels, dead_time, last0, last1):
    keep = np.zeros(times.shape[0], dtype=np.bool_)
    last = np.array([last0, last1])
    for i in range(times.shape[0]):
        c = channels[i]
        if times[i] >= last[c] + dead_time:
            keep[i] = True
            last[c] = times[i]
    return keep, last[0], last[1]


def _check_channel_order(events: DetectionEvents) -> None:
    for ch in (0, 1):
        t = events.times[events.channels == ch]
        if np.any(np.diff(t) < 0):
            raise ValueError(f"events on channel {ch} are not time-ordered")


def apply_dead_time(events: DetectionEvents, dead_time: float,
                    last_kept: tuple[float, float] = (-math.inf, -math.inf),
                    return_state: bool = False):
    """Non-paralyzable dead-time filter with an independent clock per channel.

    An event survives iff it comes at least ``dead_time`` after the last
    surviving event on the same channel. ``last_kept`` carries the clocks
    across consecutive segments of a stream.
    """
    if dead_time < 0:
        raise ValueError("dead_time must be non-negative")
    _check_channel_order(events)
    if dead_time == 0 and not return_state:
        return events
    keep, l0, l1 = _dead_time_mask(events.times, events.channels, float(dead_time),
                                   float(last_kept[0]), float(last_kept[1]))
    out = events.take(keep)
    return (out, (l0, l1)) if return_state else out


def add_dark_counts(duration: float, dark_rate: float, seed, channel: int = 0) -> DetectionEvents:
    """Homogeneous Poisson dark events on one channel.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(seed)
    times = poisson_times(rng, dark_rate, duration)
    return DetectionEvents(times, np.full(len(times), channel, np.uint8), Origin.Dark)


def spawn_afterpulses(events: DetectionEvents, afterpulse_prob: float,
                      afterpulse_delay: float, seed) -> DetectionEvents:
    """Only the afterpulses that :func:`add_afterpulses` would add, time-ordered."""
    if not 0.0 <= afterpulse_prob <= 1.0:
        raise ValueError("afterpulse_prob must lie in [0, 1]")
    if afterpulse_prob == 0 or len(events) == 0:
        return DetectionEvents.empty()
    rng = np.random.default_rng(seed)
    n = len(events)
    spawn = rng.random(n) < afterpulse_prob
    jitter = rng.exponential(afterpulse_delay / 4.0, n) if afterpulse_delay > 0 else np.zeros(n)
    parents = events.take(spawn)
    pulses = DetectionEvents(parents.times + afterpulse_delay + jitter[spawn],
                             parents.channels, Origin.Afterpulse)
    return pulses.take(np.argsort(pulses.times, kind="stable"))


def add_afterpulses(events: DetectionEvents, afterpulse_prob: float,
                    afterpulse_delay: float, seed) -> DetectionEvents:
    """Each event spawns one afterpulse with probability ``afterpulse_prob``.

    The afterpulse lands on the same channel at ``afterpulse_delay`` plus an
    exponential jitter of mean ``afterpulse_delay / 4``. Afterpulses do not
    spawn further afterpulses.
    """
    pulses = spawn_afterpulses(events, afterpulse_prob, afterpulse_delay, seed)
    return merge(events, pulses) if len(pulses) else events


def thin(events: DetectionEvents, efficiency: float, rng: np.random.Generator) -> DetectionEvents:
    if efficiency >= 1.0:
        return events
    return events.take(rng.random(len(events)) < efficiency)


def quantize(events: DetectionEvents, tick_resolution: float) -> TimeTags:
    """Floor event times to integer multiples of ``tick_resolution``."""
    if not tick_resolution > 0:
        raise ValueError("tick_resolution must be positive")
    ticks = np.floor(events.times / tick_resolution)
    if len(ticks) and ticks.max() >= _TICK_LIMIT:
        raise OverflowError("timestamp exceeds the 64-bit tick counter")
    return TimeTags(ticks.astype(np.uint64), events.channels.copy())
