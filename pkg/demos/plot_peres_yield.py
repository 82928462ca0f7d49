"""
How much randomness the Peres extractor keeps
=============================================

Von Neumann's trick keeps one bit per unequal pair, a quarter of the input
for fair bits. Peres recycles what it throws away: the XOR of each pair
and the value of each equal pair are fed back in recursively. For fair
input the yield after ``d`` levels is ``1 - (3/4)^d``.
"""

# %%
import matplotlib.pyplot as plt
import numpy as np

from plasmonrng.extractor import peres, von_neumann

rng = np.random.default_rng(0)
x = rng.integers(0, 2, 2_400_000, dtype=np.uint8)
print("von Neumann yield", len(von_neumann(x)) / x.size)

depths = np.arange(1, 17)
measured = np.array([len(peres(x, d)) for d in depths]) / x.size
for d, m in zip(depths, measured):
    print(f"depth {d:2d}  yield {m:.5f}  asymptotic {1 - 0.75 ** d:.5f}")

# %%
# The curves agree until the deepest branches run short of bits; at depth
# 16 the last XOR branch sees only ~36 bits per 2.4 Mbit chunk.
fig, ax = plt.subplots()
ax.plot(depths, measured, "o", label="2.4 Mbit chunk")
ax.plot(depths, 1 - 0.75 ** depths, label="1 - (3/4)^d")
ax.set_xlabel("recursion depth")
ax.set_ylabel("output bits / input bit")
ax.legend()

# %%
# A biased source
# ---------------
# The output stays unbiased whatever the input bias; only the yield drops,
# and it can never exceed the binary entropy of the source.
for p in (0.5023, 0.6, 0.8):
    y = (rng.random(1_000_000) < p).astype(np.uint8)
    out = peres(y, 16)
    h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    print(f"p={p:.4f}  yield {out.size / y.size:.4f}  entropy {h:.4f}  "
          f"output mean {out.mean():.4f}")
plt.show()
