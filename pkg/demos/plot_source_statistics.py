"""
Weak coherent light as a Poisson source
=======================================

The laser is attenuated until the mean number of photons per coherence
time is tiny. This demo computes that number from the optical settings,
looks at the photon-number distribution it implies, and checks that
sampled arrival gaps are exponential.
"""

# %%
# Operating point
# ---------------
# ``SourceParams`` holds the laser settings. The photon rate follows from
# the power at the objective and the coherence time from the linewidth.
import matplotlib.pyplot as plt
import numpy as np
from scipy import stats

from plasmonrng.source import SourceParams, photon_number_distribution, sample_poisson_arrivals

src = SourceParams().with_derived_mean()
print(f"power at objective  {src.input_power * 1e9:.3f} nW")
print(f"photon rate         {src.photon_rate:.3e} /s")
print(f"coherence time      {src.coherence_time:.3e} s")
print(f"mean per coherence  {src.mean_photon_number:.2e}")

# %%
# With a mean this small the vacuum term dominates and two-photon events
# are about ``mean / 2`` times rarer than single photons.
dist = photon_number_distribution(src.mean_photon_number)
print("p(0), p(1), p(2) =", dist.probabilities[:3])

fig, ax = plt.subplots()
for mean in (0.1, 1.0, 4.0):
    d = photon_number_distribution(mean)
    ax.plot(np.arange(d.cutoff + 1), d.probabilities, "o-", label=f"mean {mean}")
ax.set_xlabel("photon number n")
ax.set_ylabel("p(n)")
ax.legend()

# %%
# Arrival times
# -------------
# Gaps between arrivals of a Poisson process are exponential. A KS test on
# 10^5 gaps should not reject.
rate = 1e6
arrivals = sample_poisson_arrivals(rate, 0.1, seed=1)
gaps = np.diff(arrivals.times)
print(f"{len(arrivals)} arrivals, KS p-value "
      f"{stats.kstest(gaps, 'expon', args=(0, 1 / rate)).pvalue:.3f}")

fig, ax = plt.subplots()
ax.hist(gaps * 1e6, bins=100, density=True, label="sampled")
g = np.linspace(0, gaps.max() * 1e6, 200)
ax.plot(g, np.exp(-g), label="exp(-t)")
ax.set_xlabel("gap (us)")
ax.set_yscale("log")
ax.legend()
plt.show()
