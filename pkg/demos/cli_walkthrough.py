"""
The command-line pipeline
=========================

Every stage is also available as a ``plasmonrng`` subcommand. This script
drives them in order for a half-second simulated acquisition, in a
temporary directory, and prints what each stage wrote.
"""

# %%
import json
import tempfile
from pathlib import Path

from plasmonrng.cli import main
from plasmonrng.config import reference_profile

work = Path(tempfile.mkdtemp(prefix="plasmonrng-"))
cfg_path = work / "config.json"
cfg_path.write_text(reference_profile(duration_s=0.5, master_seed=3).to_json())


def run(*argv):
    code = main([str(a) for a in argv])
    print(f"$ plasmonrng {' '.join(str(a) for a in argv)}  -> exit {code}")
    return code


# %%
run("simulate", "--config", cfg_path, "--out", work / "run.qttag")
run("extract", work / "run.qttag", "--duration", 0.5, "--out", work / "raw.bits")
run("postprocess", work / "raw.bits", "--config", cfg_path, "--out", work / "post.bits")
run("analyze", work / "post.bits", "--out", work / "analysis", "--format", "text")

# %%
# Half a second gives ~1.2 Mbit, only two battery sequences, so the
# proportion checks cannot pass and ``nist`` exits with code 3.
run("nist", work / "post.bits", "--out", work / "nist.txt")
run("report", work / "analysis" / "summary.json", work / "post.bits.report.json",
    "--out", work / "report.md")
print((work / "report.md").read_text()[:600])
print(json.loads((work / "run.qttag.json").read_text())["regime"])
