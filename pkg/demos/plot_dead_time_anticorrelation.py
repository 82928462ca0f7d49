"""
Dead time makes neighbouring bits anticorrelated
================================================

After a click, a detector is blind for 24 ns. If the next excitation
arrives within that window, only the other detector can fire, so a bit is
slightly more likely to be followed by its complement. The effect grows
with count rate.
"""

# %%
import math

import matplotlib.pyplot as plt
import numpy as np

from plasmonrng.channel import ChannelParams
from plasmonrng.config import PipelineConfig, signal_click_rate
from plasmonrng.detector import DetectorParams
from plasmonrng.simulate import simulate_bits
from plasmonrng.source import SourceParams
from plasmonrng.stattests import autocorrelation


def balanced_config(rate_per_detector, duration=0.2, seed=0):
    """Balanced splitter with the collection efficiency tuned to a count rate."""
    base = PipelineConfig(source=SourceParams(), detector=DetectorParams(),
                          channel=ChannelParams.symmetric(0.3, 0.5),
                          duration_s=duration, master_seed=seed)
    survival = 2 * rate_per_detector / signal_click_rate(base)
    return base.replace(channel=ChannelParams.symmetric(0.3, 0.5, output_survival=survival))


# %%
# Fraction of adjacent pairs that differ, against the simple estimate
# ``1 - exp(-r tau) / 2`` for incident rate ``r`` per detector.
rates = np.array([2e5, 5e5, 1.2e6, 3e6])
measured = []
for r in rates:
    bits = simulate_bits(balanced_config(r))
    measured.append(np.mean(bits[1:] != bits[:-1]))
    print(f"r = {r:8.2e}/s  P(switch) = {measured[-1]:.4f}  "
          f"estimate {1 - math.exp(-r * 24e-9) / 2:.4f}")

fig, ax = plt.subplots()
ax.plot(rates, measured, "o", label="simulated")
ax.plot(rates, 1 - np.exp(-rates * 24e-9) / 2, label="1 - exp(-r tau)/2")
ax.set_xlabel("incident rate per detector (1/s)")
ax.set_ylabel("P(next bit differs)")
ax.legend()

# %%
# The same effect shows up as a negative lag-1 autocorrelation; longer lags
# are close to zero.
bits = simulate_bits(balanced_config(1.2e6))
ac = autocorrelation(bits, 10).coefficients
print("lags 1..5:", np.round(ac[:5], 5))
fig, ax = plt.subplots()
ax.stem(np.arange(1, 11), ac)
ax.set_xlabel("lag")
ax.set_ylabel("autocorrelation")
plt.show()
