"""
Running the statistical test battery
====================================

The battery splits a long bit stream into sequences, runs each test on
every sequence and then asks two questions per test: did enough sequences
pass at ``alpha = 0.01``, and are the p-values spread uniformly? This demo
uses a reduced configuration so it finishes in under a minute.
"""

# %%
import numpy as np

from plasmonrng.nist import BatteryConfig, proportion_threshold, run_battery

for m in (160, 80, 45):
    print(f"{m} sequences -> at least {proportion_threshold(m)} must pass")

# %%
# A seeded PRNG should pass. Eight tests run on 40 sequences of 100 kbit.
config = BatteryConfig(short_length=100_000, short_count=40, long_count=0)
fast = ("frequency", "block_frequency", "cumulative_sums", "runs", "longest_run",
        "fft", "approximate_entropy", "serial")
bits = np.random.default_rng(7).integers(0, 2, 4_000_000, dtype=np.uint8)
result = run_battery(bits, config, tests=fast)
print(result.to_text())

# %%
# A stream with 1 % excess ones fails the frequency family of tests.
biased = (np.random.default_rng(8).random(4_000_000) < 0.51).astype(np.uint8)
print(run_battery(biased, config, tests=fast).to_text())
