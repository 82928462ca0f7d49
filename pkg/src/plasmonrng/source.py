"""Attenuated coherent-state photon source.

Photon-number statistics of a weak coherent state, the coherence-time and
photon-rate budget of the laser, and Poissonian arrival-time sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.special import gammaln, pdtrc

PLANCK = constants.h  # J s, exact (CODATA 2018)
SPEED_OF_LIGHT = constants.c  # m / s, exact

# Published operating point of the 780 nm source.
NOMINAL_WAVELENGTH = 780e-9
NOMINAL_LINEWIDTH = 9.74e12
NOMINAL_REFERENCE_POWER = 1.23e-3
NOMINAL_TRANSMISSION = 2.78e-6
# The printed input power is not the product of the two figures above
# (1.23 mW * 2.78e-6 = 3.42 nW); both are kept.
NOMINAL_INPUT_POWER = 3.77e-9
NOMINAL_PHOTON_RATE = 1.47e10

RNG_ALGORITHM = "numpy.PCG64"

TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SourceParams:
    """Laser and attenuation settings defining the weak coherent state.

    Attributes
    ----------
    wavelength : float
        Vacuum wavelength in metres.
    linewidth : float
        Frequency bandwidth in Hz.
    power_at_reference : float
        Power measured before the attenuating optics, in W.
    transmission_factor : float
        Transmission of all optics between the reference point and the
        microscope objective.
    mean_photon_number : float
        Mean excitation number per coherence time, ``|alpha|^2``.
    """

    wavelength: float = NOMINAL_WAVELENGTH
    linewidth: float = NOMINAL_LINEWIDTH
    power_at_reference: float = NOMINAL_REFERENCE_POWER
    transmission_factor: float = NOMINAL_TRANSMISSION
    mean_photon_number: float = 0.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.linewidth > 0:
            raise ValueError(f"linewidth must be positive, got {self.linewidth}")
        if self.power_at_reference < 0:
            raise ValueError("power_at_reference must be non-negative")
        if not 0.0 <= self.transmission_factor <= 1.0:
            raise ValueError("transmission_factor must lie in [0, 1]")
        if self.mean_photon_number < 0:
            raise ValueError("mean_photon_number must be non-negative")

    @property
    def input_power(self) -> float:
        return attenuated_power(self.power_at_reference, self.transmission_factor)

    @property
    def photon_rate(self) -> float:
        return photon_rate(self.input_power, self.wavelength)

    @property
    def coherence_time(self) -> float:
        return coherence_time(self.linewidth)

    def with_derived_mean(self) -> "SourceParams":
        """Return a copy whose ``mean_photon_number`` is rate times coherence time."""
        from dataclasses import replace

        return replace(self, mean_photon_number=self.photon_rate * self.coherence_time)


@dataclass(frozen=True)
class PhotonNumberDistribution:
    mean: float
    probabilities: np.ndarray
    tail_mass: float

    @property
    def cutoff(self) -> int:
        return len(self.probabilities) - 1

    def __getitem__(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        if n > self.cutoff:
            return 0.0
        return float(self.probabilities[n])


@dataclass(frozen=True)
class ArrivalTimes:
    times: np.ndarray
    duration: float
    rate: float
    seed: int | None = None
    algorithm: str = RNG_ALGORITHM

    def __len__(self) -> int:
        return len(self.times)


def photon_number_distribution(mean: float, cutoff: int | None = None) -> PhotonNumberDistribution:
    """Poisson photon-number probabilities ``p_n`` for n = 0..cutoff.

    If ``cutoff`` is None it is chosen as the smallest n with tail mass
    ``P(N > n) < 1e-12``.
    """
    if mean < 0 or math.isnan(mean):
        raise ValueError(f"mean photon number must be non-negative, got {mean}")
    if cutoff is None:
        cutoff = adaptive_cutoff(mean)
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    n = np.arange(cutoff + 1)
    if mean == 0:
        probs = np.zeros(cutoff + 1)
        probs[0] = 1.0
    else:
        probs = np.exp(-mean + n * math.log(mean) - gammaln(n + 1))
    tail = float(pdtrc(cutoff, mean)) if mean > 0 else 0.0
    return PhotonNumberDistribution(mean=mean, probabilities=probs, tail_mass=tail)


def adaptive_cutoff(mean: float, tol: float = TAIL_TOLERANCE) -> int:
    n = max(1, int(mean))
    while mean > 0 and pdtrc(n, mean) >= tol:
        n += 1
    return n


def coherence_time(linewidth: float) -> float:
    """Coherence time ``sqrt(2 ln 2) / (pi * linewidth)`` in seconds."""
    if not linewidth > 0:
        raise ValueError(f"linewidth must be positive, got {linewidth}")
    return math.sqrt(2.0 * math.log(2.0)) / (math.pi * linewidth)


def photon_rate(input_power: float, wavelength: float) -> float:
    """Photon flux ``lambda * P / (h c)`` in photons per second."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if input_power < 0:
        raise ValueError(f"input_power must be non-negative, got {input_power}")
    return wavelength * input_power / (PLANCK * SPEED_OF_LIGHT)


def attenuated_power(reference_power: float, transmission_factor: float) -> float:
    if reference_power < 0:
        raise ValueError("reference_power must be non-negative")
    if not 0.0 <= transmission_factor <= 1.0:
        raise ValueError("transmission_factor must lie in [0, 1]")
    return reference_power * transmission_factor


def exponential_gaps(rng: np.random.Generator, rate: float, size: int) -> np.ndarray:
    # inverse CDF of Exp(rate); 1 - U lies in (0, 1]
    return -np.log1p(-rng.random(size)) / rate


def poisson_times(rng: np.random.Generator, rate: float, duration: float) -> np.ndarray:
    """Event times of a homogeneous Poisson process on ``[0, duration)``."""
    if rate < 0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if rate == 0:
        return np.empty(0)
    expected = rate * duration
    batch = int(expected + 6.0 * math.sqrt(expected) + 16)
    chunks = []
    t = 0.0
    while True:
        times = t + np.cumsum(exponential_gaps(rng, rate, batch))
        if times[-1] >= duration:
            chunks.append(times[: np.searchsorted(times, duration)])
            break
        chunks.append(times)
        t = times[-1]
        batch = max(16, batch // 8)
    return np.concatenate(chunks)


def sample_poisson_arrivals(rate: float, duration: float, seed: int) -> ArrivalTimes:
    """Seeded homogeneous Poisson arrivals with exponential inter-arrival gaps."""
    rng = np.random.Generator(np.random.PCG64(seed))
    times = poisson_times(rng, rate, duration)
    return ArrivalTimes(times=times, duration=duration, rate=rate, seed=seed)
