import json
import math

import numpy as np
import pytest

from plasmonrng import cli
from plasmonrng.channel import ChannelParams
from plasmonrng.config import (PipelineConfig, expected_detection_rates, load_config,
                               reference_profile, provenance)
from plasmonrng.seeding import child_rng, child_seed
from plasmonrng.simulate import run_metadata, simulate, simulate_bits
from plasmonrng.timetag import BITS_MAGIC, TTAG_MAGIC, read_bits, read_records


def test_child_seeds():
    assert child_seed(0, "photon_source", 0) == child_seed(0, "photon_source", 0)
    seeds = {child_seed(s, m, i) for s in range(3) for m in ("a", "b") for i in range(3)}
    assert len(seeds) == 18
    assert 0 <= child_seed(1, "x") < 2 ** 64
    a = child_rng(5, "detector.dark0", 2).random(4)
    assert np.array_equal(a, child_rng(5, "detector.dark0", 2).random(4))


def test_config_round_trip(tmp_path):
    cfg = reference_profile(duration_s=2.0, master_seed=7)
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    back = load_config(path)
    assert back == cfg and back.hash() == cfg.hash()
    assert cfg.replace(master_seed=8).hash() != cfg.hash()
    with pytest.raises(ValueError, match="unknown"):
        PipelineConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        PipelineConfig(method="fast")
    assert provenance(cfg)["config_hash"] == cfg.hash()


def test_reference_profile_hits_published_rate():
    cfg = reference_profile()
    total = sum(expected_detection_rates(cfg))
    assert total == pytest.approx(82_604_923 / 34, rel=1e-9)
    assert cfg.channel.ones_fraction == pytest.approx(0.5023)
    meta = run_metadata(cfg)
    assert meta["regime"]["single_excitation_ok"] and meta["regime"]["dead_time_ok"]


def test_simulation_rate_and_bias():
    cfg = reference_profile(duration_s=0.5, master_seed=1)
    bits = simulate_bits(cfg)
    rate = len(bits) / 0.5
    assert rate == pytest.approx(82_604_923 / 34, rel=5 * math.sqrt(rate * 0.5) / (rate * 0.5))
    assert abs(bits.mean() - 0.5023) < 5 * math.sqrt(0.25 / len(bits)) + 2e-4


def test_no_dead_time_gives_independent_bits():
    cfg = reference_profile(duration_s=0.2, master_seed=2)
    cfg = cfg.replace(detector=cfg.detector.__class__(dead_time=0.0))
    bits = simulate_bits(cfg).astype(float)
    d = bits - bits.mean()
    lag1 = float(np.dot(d[:-1], d[1:]) / np.dot(d, d))
    assert abs(lag1) < 5 / math.sqrt(len(bits))


def test_dark_counts_and_afterpulses_run(tmp_path):
    base = reference_profile(duration_s=0.05, master_seed=4)
    det = base.detector.__class__(dark_rate=1e4, afterpulse_prob=0.02)
    cfg = base.replace(detector=det, segment_s=0.02)
    meta = simulate(cfg, tmp_path / "x.qttag")
    tags = read_records(tmp_path / "x.qttag")
    assert len(tags) == meta["records"] > 0
    assert np.all(np.diff(tags.ticks.astype(np.int64)) >= 0)
    for ch in (0, 1):
        t = tags.ticks[tags.channels == ch].astype(np.int64)
        assert np.all(np.diff(t) >= int(24e-9 / 25e-12) - 1)


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_cli_end_to_end(tmp_path, capsys):
    cfg = reference_profile(duration_s=0.2, master_seed=3)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(cfg.to_json())
    tt, raw, pp = tmp_path / "run.qttag", tmp_path / "raw.bits", tmp_path / "pp.bits"
    assert _run("simulate", "--config", cfg_path, "--out", tt) == 0
    meta = json.loads((tmp_path / "run.qttag.json").read_text())
    assert meta["config_hash"] == cfg.hash() and meta["rng_algorithm"] == "numpy.PCG64"
    assert tt.read_bytes()[:8] == TTAG_MAGIC
    assert _run("extract", tt, "--out", raw, "--duration", 0.2) == 0
    assert raw.read_bytes()[:8] == BITS_MAGIC
    assert len(read_bits(raw)) == meta["records"]
    assert _run("postprocess", raw, "--config", cfg_path, "--out", pp) == 0
    report = json.loads((tmp_path / "pp.bits.report.json").read_text())
    assert report["output_bits"] == len(read_bits(pp))
    assert report["input"]["name"] == "raw.bits" and len(report["input"]["sha256"]) == 64
    assert report["yield_ratio"] > 0.95
    assert _run("analyze", pp, "--out", tmp_path / "an") == 0
    assert {p.name for p in (tmp_path / "an").iterdir()} == {
        "summary.json", "autocorrelation.csv", "bytes.csv", "runlengths.csv"}
    code = _run("nist", pp, "--out", tmp_path / "nist.txt")
    assert code in (0, 3)
    nist = json.loads((tmp_path / "nist.txt.json").read_text())
    assert len(nist["tests"]) == 15
    assert _run("report", tmp_path / "an" / "summary.json", tmp_path / "nist.txt.json",
                "--out", tmp_path / "report.md") == 0
    text = (tmp_path / "report.md").read_text()
    assert "## summary.json" in text and "Frequency" in text
    capsys.readouterr()


def test_cli_seed_override(tmp_path):
    a, b = tmp_path / "a.qttag", tmp_path / "b.qttag"
    _run("simulate", "--duration", 0.01, "--seed", 1, "--out", a)
    _run("simulate", "--duration", 0.01, "--seed", 2, "--out", b)
    assert a.read_bytes() != b.read_bytes()


def test_cli_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        _run("simulate")
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        _run("frobnicate")
    assert exc.value.code == 1
    bad = tmp_path / "bad.bits"
    bad.write_bytes(b"NOTMAGIC" + bytes(16))
    assert _run("analyze", bad, "--out", tmp_path / "o") == 2
    assert _run("extract", bad, "--out", tmp_path / "o.bits") == 2
    assert _run("postprocess", tmp_path / "missing", "--out", tmp_path / "p") == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"nonsense": 1}')
    assert _run("simulate", "--config", cfg, "--out", tmp_path / "s.qttag") == 2
    capsys.readouterr()


def test_cli_nist_failure_exit_code(tmp_path, capsys):
    from plasmonrng.timetag import write_bits
    zeros = tmp_path / "zeros.bits"
    write_bits(zeros, np.zeros(1_000_000, np.uint8))
    assert _run("nist", zeros, "--out", tmp_path / "n.json", "--format", "json") == 3
    assert json.loads((tmp_path / "n.json").read_text())["pass"] is False
    capsys.readouterr()


def test_cli_raw_packed_input(tmp_path, capsys):
    raw = tmp_path / "raw.bin"
    raw.write_bytes(np.random.default_rng(0).integers(0, 256, 40_000, dtype=np.uint8).tobytes())
    assert _run("analyze", raw, "--raw-length", 320_000, "--format", "text",
                "--out", tmp_path / "o") == 0
    assert "entropy" in capsys.readouterr().out
