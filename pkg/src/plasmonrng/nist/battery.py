"""Multi-sequence battery: proportions, p-value uniformity and pass flags."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc

from ..timetag import as_bits
from . import tests as T

log = logging.getLogger(__name__)

UNIFORMITY_CUTOFF = 1e-4


@dataclass(frozen=True)
class BatteryConfig:
    """Sequence partitioning and per-test parameters.

    Tests listed in ``long_tests`` run on ``long_count`` sequences of
    ``long_length`` bits; all others on ``short_count`` x ``short_length``.
    """

    short_length: int = 500_000
    short_count: int = 160
    long_length: int = 1_000_000
    long_count: int = 80
    alpha: float = 0.01
    block_frequency_m: int = 128
    template_m: int = 9
    approximate_entropy_m: int = 10
    serial_m: int = 16
    linear_complexity_m: int = 500
    long_tests: tuple = ("overlapping_template", "linear_complexity",
                         "random_excursions", "random_excursions_variant")

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "long_tests", tuple(self.long_tests))


# Fixed report order, with display names.
TEST_ORDER = (
    ("frequency", "Frequency"),
    ("block_frequency", "Block Frequency"),
    ("cumulative_sums", "Cumulative Sums"),
    ("runs", "Runs"),
    ("longest_run", "Longest Run"),
    ("rank", "Rank"),
    ("fft", "FFT"),
    ("non_overlapping_template", "Non Overlapping Template"),
    ("overlapping_template", "Overlapping Template"),
    ("universal", "Universal"),
    ("approximate_entropy", "Approximate Entropy"),
    ("random_excursions", "Random Excursions"),
    ("random_excursions_variant", "Random Excursions Variant"),
    ("serial", "Serial"),
    ("linear_complexity", "Linear Complexity"),
)
TEST_NAMES = tuple(name for name, _ in TEST_ORDER)
DISPLAY = dict(TEST_ORDER)


def _substat_labels(name: str, config: BatteryConfig) -> list[str]:
    if name == "cumulative_sums":
        return ["forward", "backward"]
    if name == "serial":
        return ["p1", "p2"]
    if name == "random_excursions":
        return [f"x={s:+d}" for s in T.RANDOM_EXCURSION_STATES]
    if name == "random_excursions_variant":
        return [f"x={s:+d}" for s in T.VARIANT_STATES]
    if name == "non_overlapping_template":
        m = config.template_m
        return [format(t, f"0{m}b") for t in T.aperiodic_templates(m)]
    return [""]


def run_test(name: str, bits, config: BatteryConfig = BatteryConfig()) -> list[float]:
    """Run one named test on one sequence and return its p-values."""
    x = as_bits(bits)
    if name == "frequency":
        return T.frequency(x)
    if name == "block_frequency":
        return T.block_frequency(x, config.block_frequency_m)
    if name == "cumulative_sums":
        return T.cumulative_sums(x)
    if name == "runs":
        return T.runs(x)
    if name == "longest_run":
        return T.longest_run(x)
    if name == "rank":
        return T.binary_matrix_rank(x)
    if name == "fft":
        return T.spectral(x)
    if name == "non_overlapping_template":
        return T.non_overlapping_template(x, config.template_m)
    if name == "overlapping_template":
        return T.overlapping_template(x, config.template_m)
    if name == "universal":
        return T.universal(x)
    if name == "approximate_entropy":
        return T.approximate_entropy(x, config.approximate_entropy_m)
    if name == "random_excursions":
        return T.random_excursions(x)
    if name == "random_excursions_variant":
        return T.random_excursions_variant(x)
    if name == "serial":
        return T.serial(x, config.serial_m)
    if name == "linear_complexity":
        return T.linear_complexity(x, config.linear_complexity_m)
    raise KeyError(f"unknown test {name!r}")


def proportion_threshold(m: int, alpha: float = 0.01) -> int:
    """Minimum number of passing sequences out of ``m``.

    ``floor(m * (p - 3 sqrt(p (1 - p) / m)))`` with ``p = 1 - alpha``.
    """
    if m < 1:
        raise ValueError("need at least one sequence")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    p = 1.0 - alpha
    return math.floor(m * (p - 3.0 * math.sqrt(p * (1.0 - p) / m)))


def uniformity_p(pvalues) -> float:
    """Chi-square p-value of the p-value histogram over ten equal bins."""
    p = np.asarray(pvalues, dtype=float)
    if p.size == 0:
        return math.nan
    counts = np.bincount(np.minimum((p * 10).astype(int), 9), minlength=10)
    expected = p.size / 10.0
    chi2 = np.sum((counts - expected) ** 2 / expected)
    return float(gammaincc(4.5, chi2 / 2.0))


@dataclass
class SubStatistic:
    label: str
    p_values: list
    proportion_passing: int
    threshold: int
    uniformity_p: float

    @property
    def passed(self) -> bool:
        return (self.proportion_passing >= self.threshold
                and self.uniformity_p >= UNIFORMITY_CUTOFF)


@dataclass
class TestOutcome:
    """Aggregate result of one test over many sequences.

    Tests with several sub-statistics pass only when every sub-statistic
    passes; the row reports the median uniformity p-value and the smallest
    passing proportion.
    """

    test_name: str
    substats: list = field(default_factory=list)
    sequences_tested: int = 0
    sequences_skipped: int = 0
    errors: list = field(default_factory=list)

    @property
    def p_values(self) -> list:
        return [s.p_values for s in self.substats]

    @property
    def uniformity_p(self) -> float:
        if not self.substats:
            return math.nan
        return float(np.median([s.uniformity_p for s in self.substats]))

    @property
    def _worst(self) -> SubStatistic | None:
        if not self.substats:
            return None
        return min(self.substats, key=lambda s: (s.proportion_passing - s.threshold,
                                                 s.uniformity_p))

    @property
    def proportion_passing(self) -> int:
        return self._worst.proportion_passing if self.substats else 0

    @property
    def threshold(self) -> int:
        return self._worst.threshold if self.substats else 0

    @property
    def passed(self) -> bool:
        return bool(self.substats) and all(s.passed for s in self.substats)

    @property
    def display_name(self) -> str:
        return DISPLAY.get(self.test_name, self.test_name)

    def as_dict(self, include_pvalues: bool = False) -> dict:
        d = {
            "test": self.display_name,
            "p_value": self.uniformity_p,
            "proportion": self.proportion_passing,
            "threshold": self.threshold,
            "sequences_tested": self.sequences_tested,
            "sequences_skipped": self.sequences_skipped,
            "pass": self.passed,
            "substatistics": [
                {"label": s.label, "uniformity_p": s.uniformity_p,
                 "proportion": s.proportion_passing, "threshold": s.threshold,
                 "pass": s.passed, **({"p_values": s.p_values} if include_pvalues else {})}
                for s in self.substats
            ],
        }
        if self.errors:
            d["errors"] = self.errors
        return d


@dataclass
class BatteryResult:
    outcomes: list
    config: BatteryConfig

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def __getitem__(self, name: str) -> TestOutcome:
        for o in self.outcomes:
            if o.test_name == name:
                return o
        raise KeyError(name)

    def as_dict(self, include_pvalues: bool = False) -> dict:
        return {
            "alpha": self.config.alpha,
            "pass": self.passed,
            "tests": [o.as_dict(include_pvalues) for o in self.outcomes],
        }

    def to_json(self, **extra) -> str:
        return json.dumps({**extra, **self.as_dict()}, indent=2, sort_keys=False)

    def to_text(self) -> str:
        lines = [f"{'Statistical Test':<28}{'p-value':>10}  {'Prop/Thr':>9}  Pass",
                 "-" * 56]
        for o in self.outcomes:
            p = "-" if math.isnan(o.uniformity_p) else f"{o.uniformity_p:.6f}"
            prop = f"{o.proportion_passing}/{o.threshold}"
            lines.append(f"{o.display_name:<28}{p:>10}  {prop:>9}  {'Yes' if o.passed else 'No'}")
        return "\n".join(lines) + "\n"


def split_sequences(bits, length: int, count: int) -> list[np.ndarray]:
    x = as_bits(bits)
    available = min(count, x.size // length)
    return [x[i * length:(i + 1) * length] for i in range(available)]


def evaluate(name: str, sequences, config: BatteryConfig) -> TestOutcome:
    """Run one test over a list of sequences and aggregate."""
    outcome = TestOutcome(name)
    rows = []
    for seq in sequences:
        try:
            rows.append(run_test(name, seq, config))
        except T.InsufficientCycles:
            outcome.sequences_skipped += 1
        except (T.InputSizeError, ValueError) as exc:
            outcome.errors.append(str(exc))
            outcome.sequences_skipped += 1
    outcome.sequences_tested = len(rows)
    if not rows:
        return outcome
    table = np.asarray(rows, dtype=float)
    labels = _substat_labels(name, config)
    for j, label in enumerate(labels):
        col = table[:, j]
        outcome.substats.append(SubStatistic(
            label=label,
            p_values=[float(v) for v in col],
            proportion_passing=int(np.count_nonzero(col >= config.alpha)),
            threshold=proportion_threshold(len(col), config.alpha),
            uniformity_p=uniformity_p(col),
        ))
    return outcome


def run_battery(bits_or_sequences, config: BatteryConfig = BatteryConfig(),
                tests=TEST_NAMES) -> BatteryResult:
    """Run the battery on one long bit stream (split per ``config``) or on
    an explicit ``(short_sequences, long_sequences)`` pair."""
    if isinstance(bits_or_sequences, tuple):
        short, long_ = bits_or_sequences
    else:
        short = split_sequences(bits_or_sequences, config.short_length, config.short_count)
        long_ = split_sequences(bits_or_sequences, config.long_length, config.long_count)
    outcomes = []
    for name in tests:
        seqs = long_ if name in config.long_tests else short
        log.info("running %s on %d sequences", name, len(seqs))
        outcomes.append(evaluate(name, seqs, config))
    return BatteryResult(outcomes, config)
