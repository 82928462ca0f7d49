"""Command-line entry point: ``plasmonrng <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 the NIST
battery failed (``nist`` only).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import stattests
from .config import PipelineConfig, load_config, reference_profile, provenance
from .extractor import extract_pipeline
from .nist.battery import run_battery
from .simulate import simulate
from .timetag import (BITS_MAGIC, TTAG_MAGIC, FormatError, atomic_write, bits_from_records,
                      iter_records, raw_rate, read_bits, sniff_magic, write_bits)

log = logging.getLogger("plasmonrng")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BATTERY_FAILED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> PipelineConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = reference_profile()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(master_seed=args.seed)
    if getattr(args, "duration", None) is not None:
        cfg = cfg.replace(duration_s=args.duration)
    return cfg


def _dump(path, obj) -> None:
    atomic_write(path, (json.dumps(obj, indent=2) + "\n").encode())


def _input_ref(path) -> dict:
    """Name and content hash of an input file; absolute paths would break
    byte-identical reports across working directories."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return {"name": Path(path).name, "sha256": h.hexdigest()}


def _expect_magic(path, magic: bytes) -> None:
    found = sniff_magic(path)
    if found != magic:
        raise FormatError(f"{path}: bad magic {found!r}, expected {magic!r}")


def _load_bits(args) -> np.ndarray:
    if getattr(args, "raw_length", None) is not None:
        return read_bits(args.input, raw_length=args.raw_length).bits
    _expect_magic(args.input, BITS_MAGIC)
    return read_bits(args.input).bits


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    meta = simulate(cfg, out)
    _dump(out.with_name(out.name + ".json"), meta)
    print(f"{meta['records']} records, {meta['achieved_detection_rate']:.4g} counts/s -> {out}")
    return EXIT_OK


def cmd_extract(args) -> int:
    _expect_magic(args.input, TTAG_MAGIC)
    chunks, first, last = [], None, None
    for tags in iter_records(args.input):
        if len(tags):
            first = tags.ticks[0] if first is None else first
            last = tags.ticks[-1]
        chunks.append(bits_from_records(tags).bits)
    bits = np.concatenate(chunks) if chunks else np.empty(0, np.uint8)
    write_bits(args.out, bits)
    meta = {"input": _input_ref(args.input), "bits": int(bits.size)}
    if args.duration:
        meta["raw_rate_bits_per_s"] = raw_rate(bits.size, args.duration)
    if first is not None:
        meta["span_ticks"] = int(last) - int(first)
    _dump(Path(args.out).with_name(Path(args.out).name + ".json"), meta)
    print(f"{bits.size} bits -> {args.out}")
    return EXIT_OK


def cmd_postprocess(args) -> int:
    cfg = _config(args)
    bits = _load_bits(args)
    out, report = extract_pipeline(bits, cfg.extractor)
    write_bits(args.out, out)
    doc = {**provenance(cfg), "input": _input_ref(args.input),
           "input_bits": int(bits.size), "output_bits": len(out),
           **report.as_dict()}
    _dump(Path(args.out).with_name(Path(args.out).name + ".report.json"), doc)
    throughput = report.throughput()
    print(f"{bits.size} -> {len(out)} bits (yield {report.yield_ratio:.5f}); "
          f"throughput {throughput['with_shuffle']:.3g} bit/s with shuffle, "
          f"{throughput['without_shuffle']:.3g} without")
    return EXIT_OK


def analyze_bits(bits, max_lag: int = 31) -> tuple[dict, dict]:
    """Return (summary dict, {name: csv text}) for the characterisation battery."""
    ac = stattests.autocorrelation(bits, max_lag)
    hist = stattests.block_histogram(bits, 8)
    runs = stattests.run_lengths(bits)
    summ = stattests.summary(bits)
    summ.update(
        slope_zeros=runs.fitted_slope_zeros, slope_zeros_stderr=runs.slope_stderr_zeros,
        slope_ones=runs.fitted_slope_ones, slope_ones_stderr=runs.slope_stderr_ones,
        max_abs_autocorrelation=float(np.max(np.abs(ac.coefficients))),
        autocorrelation_lag1=float(ac.coefficients[0]),
    )
    csvs = {"autocorrelation.csv": ac.to_csv(), "bytes.csv": hist.to_csv(),
            "runlengths.csv": runs.to_csv()}
    return summ, csvs


def cmd_analyze(args) -> int:
    cfg = _config(args)
    bits = _load_bits(args)
    summ, csvs = analyze_bits(bits)
    doc = {**provenance(cfg), "input": _input_ref(args.input), **summ}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("json", "text"):
        _dump(out / "summary.json", doc)
    if args.format in ("csv", "json"):
        for name, text in csvs.items():
            atomic_write(out / name, text.encode())
    if args.format == "text":
        for key in ("mean", "entropy", "pi", "fraction_ones", "slope_zeros", "slope_ones",
                    "max_abs_autocorrelation"):
            print(f"{key:<26}{doc[key]:.6g}")
    return EXIT_OK


def cmd_nist(args) -> int:
    cfg = _config(args)
    bits = _load_bits(args)
    result = run_battery(bits, cfg.battery)
    text = result.to_text()
    doc = {**provenance(cfg), "input": _input_ref(args.input), **result.as_dict()}
    out = Path(args.out)
    if args.format == "json":
        _dump(out, doc)
    else:
        atomic_write(out, text.encode())
        _dump(out.with_name(out.name + ".json"), doc)
    sys.stdout.write(text)
    return EXIT_OK if result.passed else EXIT_BATTERY_FAILED


def cmd_report(args) -> int:
    parts = {}
    for path in args.inputs:
        parts[Path(path).name] = json.loads(Path(path).read_text())
    cfg = _config(args)
    doc = {**provenance(cfg), "parts": parts}
    if args.format == "json":
        _dump(args.out, doc)
        return EXIT_OK
    lines = ["# plasmonrng report", "", f"config_hash: {doc['config_hash']}",
             f"version: {doc['version']}", ""]
    for name, part in parts.items():
        lines.append(f"## {name}")
        for key, value in part.items():
            if isinstance(value, (dict, list)):
                continue
            lines.append(f"- {key}: {value}")
        for row in part.get("tests", []):
            lines.append(f"- {row['test']}: p={row['p_value']:.6f} "
                         f"{row['proportion']}/{row['threshold']} "
                         f"{'Yes' if row['pass'] else 'No'}")
        lines.append("")
    atomic_write(args.out, "\n".join(lines).encode())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plasmonrng", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt=None):
        sp.add_argument("--config", help="JSON pipeline config (default: published operating point)")
        sp.add_argument("--seed", type=int, help="override master_seed")
        sp.add_argument("--out", required=True)
        if fmt:
            sp.add_argument("--format", choices=("json", "csv", "text"), default=fmt)

    sp = sub.add_parser("simulate", help="simulate detections into a .qttag file")
    common(sp)
    sp.add_argument("--duration", type=float, help="override duration_s")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("extract", help="time tags -> raw bits")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--duration", type=float, help="acquisition time for the raw-rate figure")
    sp.set_defaults(func=cmd_extract)

    for name, func, fmt, help_ in (
            ("postprocess", cmd_postprocess, None, "shuffle + Peres extraction"),
            ("analyze", cmd_analyze, "json", "characterisation battery"),
            ("nist", cmd_nist, "text", "NIST SP 800-22 battery")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input")
        common(sp, fmt)
        sp.add_argument("--raw-length", type=int,
                        help="treat input as raw packed bits of this length")
        sp.set_defaults(func=func)

    sp = sub.add_parser("report", help="aggregate JSON outputs into one document")
    sp.add_argument("inputs", nargs="+")
    common(sp, "text")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FormatError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"plasmonrng: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
