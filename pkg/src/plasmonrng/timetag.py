"""Binary time-tag and bit-sequence file formats.

``.qttag`` layout (all integers little-endian)::

    bytes 0-7    magic b"QTTAG001"
    bytes 8-15   record count N (uint64)
    then N 9-byte records: ticks (uint64) followed by channel (uint8, 0 or 1)

Bit files::

    bytes 0-7    magic b"QBITS001"
    bytes 8-15   bit length L (uint64)
    then ceil(L / 8) payload bytes, MSB first, zero padded
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TTAG_MAGIC = b"QTTAG001"
BITS_MAGIC = b"QBITS001"
HEADER_SIZE = 16

RECORD_DTYPE = np.dtype([("ticks", "<u8"), ("channel", "u1")])
assert RECORD_DTYPE.itemsize == 9

MEASURED_RECORD_COUNT = 82_604_923
MEASURED_ACQUISITION_TIME = 34.0


class FormatError(ValueError):
    """Raised for malformed time-tag or bit files."""


@dataclass
class TimeTags:
    """Columnar time-tag records: tick counts and detector channel."""

    ticks: np.ndarray
    channels: np.ndarray

    def __post_init__(self):
        self.ticks = np.asarray(self.ticks, dtype=np.uint64)
        self.channels = np.asarray(self.channels, dtype=np.uint8)
        if self.ticks.shape != self.channels.shape:
            raise ValueError("ticks and channels must have equal length")
        if len(self.channels) and self.channels.max() > 1:
            raise ValueError("channel must be 0 or 1")

    def __len__(self) -> int:
        return len(self.ticks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeTags):
            return NotImplemented
        return (np.array_equal(self.ticks, other.ticks)
                and np.array_equal(self.channels, other.channels))

    def __getitem__(self, index) -> "TimeTags":
        return TimeTags(self.ticks[index], self.channels[index])

    @classmethod
    def concatenate(cls, parts) -> "TimeTags":
        parts = list(parts)
        if not parts:
            return cls(np.empty(0, np.uint64), np.empty(0, np.uint8))
        return cls(np.concatenate([p.ticks for p in parts]),
                   np.concatenate([p.channels for p in parts]))


class BitSequence:
    """Length-aware bit string.

    Bits are held unpacked as a ``uint8`` array of zeros and ones;
    :attr:`payload` gives the packed MSB-first form.
    """

    __slots__ = ("bits",)

    def __init__(self, bits=()):
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0 or 1")
        self.bits = bits

    @classmethod
    def from_string(cls, text: str) -> "BitSequence":
        text = "".join(text.split())
        return cls(np.frombuffer(text.encode(), np.uint8) - ord("0"))

    @classmethod
    def from_payload(cls, payload: bytes, length: int) -> "BitSequence":
        if len(payload) != (length + 7) // 8:
            raise FormatError(f"payload of {len(payload)} bytes does not hold {length} bits")
        return cls(np.unpackbits(np.frombuffer(payload, np.uint8), count=length))

    @property
    def payload(self) -> bytes:
        return np.packbits(self.bits).tobytes()

    def __len__(self) -> int:
        return self.bits.size

    def __array__(self, dtype=None, copy=None):
        return self.bits if dtype is None else self.bits.astype(dtype)

    def __eq__(self, other) -> bool:
        if isinstance(other, BitSequence):
            return np.array_equal(self.bits, other.bits)
        return NotImplemented

    def __str__(self) -> str:
        return (self.bits + ord("0")).tobytes().decode()

    def __repr__(self) -> str:
        shown = str(self[:64]) + ("..." if len(self) > 64 else "")
        return f"BitSequence(length={len(self)}, bits={shown})"

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitSequence(self.bits[index])
        return int(self.bits[index])


def as_bits(bits) -> np.ndarray:
    """Coerce a BitSequence, string or array-like to a 1-D uint8 array."""
    if isinstance(bits, BitSequence):
        return bits.bits
    if isinstance(bits, str):
        return BitSequence.from_string(bits).bits
    arr = np.asarray(bits)
    if arr.dtype != np.uint8:
        arr = arr.astype(np.uint8)
    return arr.ravel()


# --- records ---------------------------------------------------------------

def encode_records(records: TimeTags) -> bytes:
    if np.any(records.ticks[1:] < records.ticks[:-1]):
        raise ValueError("records must be time-ordered")
    body = np.empty(len(records), RECORD_DTYPE)
    body["ticks"] = records.ticks
    body["channel"] = records.channels
    return TTAG_MAGIC + np.uint64(len(records)).astype("<u8").tobytes() + body.tobytes()


def decode_records(data: bytes) -> TimeTags:
    if len(data) < HEADER_SIZE:
        raise FormatError("truncated header")
    if data[:8] != TTAG_MAGIC:
        raise FormatError(f"bad magic {data[:8]!r}, expected {TTAG_MAGIC!r}")
    count = int(np.frombuffer(data, "<u8", count=1, offset=8)[0])
    body = len(data) - HEADER_SIZE
    if body % RECORD_DTYPE.itemsize:
        raise FormatError("record stream length is not a multiple of the record size")
    if body // RECORD_DTYPE.itemsize != count:
        raise FormatError(f"header declares {count} records, stream holds "
                          f"{body // RECORD_DTYPE.itemsize}")
    rec = np.frombuffer(data, RECORD_DTYPE, count=count, offset=HEADER_SIZE)
    if count and rec["channel"].max() > 1:
        raise FormatError("channel byte outside {0, 1}")
    return TimeTags(rec["ticks"].copy(), rec["channel"].copy())


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class RecordWriter:
    """Stream records to a ``.qttag`` file; the header count is patched on close."""

    def __init__(self, path):
        self.path = Path(path)
        fd, self._tmp = tempfile.mkstemp(dir=self.path.parent, prefix=f".{self.path.name}.")
        self._fh = os.fdopen(fd, "wb")
        self._fh.write(TTAG_MAGIC + bytes(8))
        self.count = 0
        self._last = 0

    def write(self, records: TimeTags) -> None:
        if not len(records):
            return
        t = records.ticks
        if t[0] < self._last or np.any(t[1:] < t[:-1]):
            raise ValueError("records must be time-ordered")
        body = np.empty(len(records), RECORD_DTYPE)
        body["ticks"] = records.ticks
        body["channel"] = records.channels
        self._fh.write(body.tobytes())
        self.count += len(records)
        self._last = records.ticks[-1]

    def close(self) -> None:
        self._fh.seek(8)
        self._fh.write(np.uint64(self.count).astype("<u8").tobytes())
        self._fh.close()
        os.replace(self._tmp, self.path)

    def abort(self) -> None:
        self._fh.close()
        os.unlink(self._tmp)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.abort()


def write_records(path, records: TimeTags) -> None:
    atomic_write(path, encode_records(records))


def read_records(path) -> TimeTags:
    return decode_records(Path(path).read_bytes())


def iter_records(path, chunk_records: int = 1 << 22):
    """Yield consecutive :class:`TimeTags` chunks from a ``.qttag`` file."""
    with open(path, "rb") as fh:
        header = fh.read(HEADER_SIZE)
        if len(header) < HEADER_SIZE:
            raise FormatError("truncated header")
        if header[:8] != TTAG_MAGIC:
            raise FormatError(f"bad magic {header[:8]!r}, expected {TTAG_MAGIC!r}")
        remaining = int(np.frombuffer(header, "<u8", count=1, offset=8)[0])
        while remaining:
            n = min(remaining, chunk_records)
            raw = fh.read(n * RECORD_DTYPE.itemsize)
            if len(raw) != n * RECORD_DTYPE.itemsize:
                raise FormatError("truncated record stream")
            rec = np.frombuffer(raw, RECORD_DTYPE)
            if rec["channel"].max() > 1:
                raise FormatError("channel byte outside {0, 1}")
            remaining -= n
            yield TimeTags(rec["ticks"].copy(), rec["channel"].copy())
        if fh.read(1):
            raise FormatError("trailing bytes after the declared records")


# --- bits ------------------------------------------------------------------

def bits_from_records(records: TimeTags) -> BitSequence:
    """One bit per record: detector 0 gives 0, detector 1 gives 1."""
    return BitSequence(records.channels)


def raw_rate(record_count: int, duration_s: float) -> float:
    if not duration_s > 0:
        raise ValueError("duration must be positive")
    return record_count / duration_s


def encode_bits(bits) -> bytes:
    seq = bits if isinstance(bits, BitSequence) else BitSequence(as_bits(bits))
    return BITS_MAGIC + np.uint64(len(seq)).astype("<u8").tobytes() + seq.payload


def decode_bits(data: bytes) -> BitSequence:
    if len(data) < HEADER_SIZE:
        raise FormatError("truncated header")
    if data[:8] != BITS_MAGIC:
        raise FormatError(f"bad magic {data[:8]!r}, expected {BITS_MAGIC!r}")
    length = int(np.frombuffer(data, "<u8", count=1, offset=8)[0])
    payload = data[HEADER_SIZE:]
    seq = BitSequence.from_payload(payload, length)
    pad = (-length) % 8
    if pad and payload[-1] & ((1 << pad) - 1):
        raise FormatError("non-zero pad bits")
    return seq


def write_bits(path, bits) -> None:
    atomic_write(path, encode_bits(bits))


def read_bits(path, raw_length: int | None = None) -> BitSequence:
    """Read a QBITS001 file, or a raw packed file when ``raw_length`` is given."""
    data = Path(path).read_bytes()
    if raw_length is not None:
        return BitSequence.from_payload(data[: (raw_length + 7) // 8], raw_length)
    return decode_bits(data)


def sniff_magic(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read(8)
