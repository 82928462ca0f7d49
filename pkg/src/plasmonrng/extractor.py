"""Von Neumann and recursive Peres debiasing with an optional pre-shuffle."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .seeding import child_seed
from .timetag import BitSequence, as_bits

DEFAULT_DEPTH = 16
DEFAULT_CHUNK_BITS = 2_400_000
SHUFFLE_ALGORITHM = "numpy.PCG64 + Generator.permutation (Fisher-Yates)"


@dataclass(frozen=True)
class ExtractorConfig:
    recursion_depth_limit: int = DEFAULT_DEPTH
    shuffle_seed: int = 0
    chunk_size_bits: int = DEFAULT_CHUNK_BITS
    shuffle: bool = True

    def __post_init__(self):
        if self.recursion_depth_limit < 1:
            raise ValueError("recursion_depth_limit must be >= 1")
        if self.chunk_size_bits < 2:
            raise ValueError("chunk_size_bits must be >= 2")


@dataclass
class ExtractionReport:
    input_lengths: list = field(default_factory=list)
    output_lengths: list = field(default_factory=list)
    chunk_seeds: list = field(default_factory=list)
    depth: int = DEFAULT_DEPTH
    shuffle_algorithm: str = SHUFFLE_ALGORITHM
    seconds_total: float = 0.0
    seconds_shuffle: float = 0.0

    @property
    def mean_output(self) -> float:
        return float(np.mean(self.output_lengths)) if self.output_lengths else 0.0

    @property
    def std_error_output(self) -> float:
        n = len(self.output_lengths)
        return float(np.std(self.output_lengths, ddof=1) / np.sqrt(n)) if n > 1 else 0.0

    @property
    def yield_ratio(self) -> float:
        total_in = sum(self.input_lengths)
        return sum(self.output_lengths) / total_in if total_in else 0.0

    def throughput(self) -> dict:
        """Input bits per second of processing, with and without the shuffle."""
        total_in = sum(self.input_lengths)
        extract_only = self.seconds_total - self.seconds_shuffle
        return {
            "with_shuffle": total_in / self.seconds_total if self.seconds_total > 0 else None,
            "without_shuffle": total_in / extract_only if extract_only > 0 else None,
        }

    def as_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        d.update(mean_output=self.mean_output, std_error_output=self.std_error_output,
                 yield_ratio=self.yield_ratio)
        # wall-clock fields would make saved reports non-reproducible
        del d["seconds_total"], d["seconds_shuffle"]
        if include_timing:
            d["throughput_bits_per_s"] = self.throughput()
        return d


def _pairs(x: np.ndarray):
    n = x.size - (x.size & 1)
    return x[0:n:2], x[1:n:2]


def von_neumann(bits) -> np.ndarray:
    """Map non-overlapping pairs 01 -> 0 and 10 -> 1; drop 00 and 11."""
    a, b = _pairs(as_bits(bits))
    return a[a != b].copy()


def peres(bits, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Peres' iterated von Neumann extractor.

    Output is ``vn(x) + peres(u) + peres(v)`` where ``u`` is the pairwise XOR
    of ``x`` and ``v`` keeps the first bit of every equal pair. Recursion
    stops at ``depth`` levels or when fewer than two bits remain.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    out: list[np.ndarray] = []
    _peres_into(as_bits(bits), depth, out)
    return np.concatenate(out) if out else np.empty(0, np.uint8)


def _peres_into(x: np.ndarray, depth: int, out: list) -> None:
    if depth == 0 or x.size < 2:
        return
    a, b = _pairs(x)
    differ = a != b
    out.append(a[differ])
    if depth == 1:
        return
    _peres_into(a ^ b, depth - 1, out)
    _peres_into(a[~differ], depth - 1, out)


def shuffle(bits, seed) -> np.ndarray:
    """Uniform random permutation of bit positions, deterministic per seed."""
    x = as_bits(bits)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.permutation(x)


def chunk_seed(shuffle_seed: int, index: int) -> int:
    return child_seed(shuffle_seed, "extractor.shuffle", index)


def extract_pipeline(bits, config: ExtractorConfig = ExtractorConfig()):
    """Shuffle then Peres-extract each chunk, concatenating in chunk order.

    Returns ``(BitSequence, ExtractionReport)``. A trailing partial chunk is
    processed like any other.
    """
    x = as_bits(bits)
    report = ExtractionReport(depth=config.recursion_depth_limit)
    outputs = []
    t_start = time.perf_counter()
    for i, start in enumerate(range(0, x.size, config.chunk_size_bits)):
        chunk = x[start:start + config.chunk_size_bits]
        if config.shuffle:
            seed = chunk_seed(config.shuffle_seed, i)
            t0 = time.perf_counter()
            chunk = shuffle(chunk, seed)
            report.seconds_shuffle += time.perf_counter() - t0
            report.chunk_seeds.append(seed)
        y = peres(chunk, config.recursion_depth_limit)
        outputs.append(y)
        report.input_lengths.append(int(chunk.size))
        report.output_lengths.append(int(y.size))
    report.seconds_total = time.perf_counter() - t_start
    out = np.concatenate(outputs) if outputs else np.empty(0, np.uint8)
    return BitSequence(out), report
