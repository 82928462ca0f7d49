"""Deterministic seed splitting.

A child seed is the first 8 bytes (little-endian) of
``blake2b(f"{master_seed}/{module}/{index}", digest_size=8)``. Every
stochastic stream in a run draws from its own ``PCG64`` generator seeded
this way, so streams are independent and reproducible.
"""

import hashlib

import numpy as np


def child_seed(master_seed: int, module: str, index: int = 0) -> int:
    key = f"{int(master_seed)}/{module}/{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def child_rng(master_seed: int, module: str, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child_seed(master_seed, module, index)))
