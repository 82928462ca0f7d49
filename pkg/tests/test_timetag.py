import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plasmonrng.timetag import (BITS_MAGIC, RECORD_DTYPE, TTAG_MAGIC, BitSequence, FormatError,
                                RecordWriter, TimeTags, bits_from_records, decode_bits,
                                decode_records, encode_bits, encode_records, iter_records,
                                raw_rate, read_bits, read_records, sniff_magic, write_bits,
                                write_records)


def test_record_layout():
    assert RECORD_DTYPE.itemsize == 9
    data = encode_records(TimeTags([1, 258], [0, 1]))
    assert data[:8] == TTAG_MAGIC
    assert data[8:16] == (2).to_bytes(8, "little")
    assert data[16:25] == (1).to_bytes(8, "little") + b"\x00"
    assert data[25:34] == (258).to_bytes(8, "little") + b"\x01"


def test_bit_file_layout():
    data = encode_bits(BitSequence.from_string("1011"))
    assert data == BITS_MAGIC + (4).to_bytes(8, "little") + bytes([0b10110000])


def test_records_to_bits():
    bits = bits_from_records(TimeTags([5, 9, 11, 40], [0, 1, 1, 0]))
    assert str(bits) == "0110"


def test_raw_rate():
    assert raw_rate(82_604_923, 34.0) == pytest.approx(2.43e6, rel=5e-4)
    with pytest.raises(ValueError):
        raw_rate(10, 0.0)


tick_lists = st.lists(st.integers(0, 2 ** 64 - 1), max_size=200).map(sorted)


@settings(max_examples=100, deadline=None)
@given(tick_lists, st.data())
def test_record_round_trip(ticks, data):
    channels = data.draw(st.lists(st.integers(0, 1), min_size=len(ticks), max_size=len(ticks)))
    tags = TimeTags(np.array(ticks, np.uint64), channels)
    assert decode_records(encode_records(tags)) == tags


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=300))
def test_bit_round_trip(bits):
    seq = BitSequence(bits)
    back = decode_bits(encode_bits(seq))
    assert back == seq and len(back) == len(bits)


def test_file_round_trip_and_streaming(tmp_path, rng):
    tags = TimeTags(np.sort(rng.integers(0, 2 ** 40, 1000)).astype(np.uint64),
                    rng.integers(0, 2, 1000))
    path = tmp_path / "a.qttag"
    write_records(path, tags)
    assert read_records(path) == tags
    assert TimeTags.concatenate(iter_records(path, chunk_records=77)) == tags
    streamed = tmp_path / "b.qttag"
    with RecordWriter(streamed) as w:
        w.write(tags[:400])
        w.write(tags[400:])
    assert streamed.read_bytes() == path.read_bytes()
    assert sniff_magic(path) == TTAG_MAGIC


def test_writer_rejects_disorder(tmp_path):
    with pytest.raises(ValueError):
        with RecordWriter(tmp_path / "x.qttag") as w:
            w.write(TimeTags([10], [0]))
            w.write(TimeTags([5], [0]))
    assert not (tmp_path / "x.qttag").exists()
    assert list(tmp_path.iterdir()) == []


def test_encode_rejects_disorder():
    with pytest.raises(ValueError):
        encode_records(TimeTags([3, 2], [0, 0]))


@pytest.mark.parametrize("mutate, message", [
    (lambda d: b"XXXXXXXX" + d[8:], "magic"),
    (lambda d: d[:10], "truncated"),
    (lambda d: d[:-1], "multiple"),
    (lambda d: d[:8] + (3).to_bytes(8, "little") + d[16:], "declares"),
    (lambda d: d[:-1] + b"\x07", "channel"),
])
def test_malformed_records(mutate, message):
    data = encode_records(TimeTags([1, 2], [0, 1]))
    with pytest.raises(FormatError, match=message):
        decode_records(mutate(data))


def test_malformed_bits():
    good = encode_bits(BitSequence.from_string("101"))
    with pytest.raises(FormatError, match="magic"):
        decode_bits(TTAG_MAGIC + good[8:])
    with pytest.raises(FormatError, match="pad"):
        decode_bits(good[:-1] + bytes([good[-1] | 1]))
    with pytest.raises(FormatError):
        decode_bits(good[:-1])


def test_raw_packed_bits(tmp_path):
    path = tmp_path / "raw.bin"
    path.write_bytes(bytes([0b11000000, 0xFF]))
    assert str(read_bits(path, raw_length=3)) == "110"
    write_bits(tmp_path / "b.bits", "0101")
    assert str(read_bits(tmp_path / "b.bits")) == "0101"


def test_bit_sequence_behaviour():
    s = BitSequence.from_string("0110 1")
    assert len(s) == 5 and s[1] == 1 and str(s[1:3]) == "11"
    assert np.asarray(s).dtype == np.uint8
    with pytest.raises(ValueError):
        BitSequence([0, 2])


def test_ticks_above_int63_stay_ordered(tmp_path):
    tags = TimeTags(np.array([2 ** 62, 2 ** 63 + 5, 2 ** 64 - 1], np.uint64), [0, 1, 0])
    assert decode_records(encode_records(tags)) == tags
    with RecordWriter(tmp_path / "big.qttag") as w:
        w.write(tags[:2])
        w.write(tags[2:])
    assert read_records(tmp_path / "big.qttag") == tags
