"""Deterministic stream derivation.

Every random stream is keyed by the master seed plus a tuple of integers, so
results do not depend on evaluation order or parallelism.
"""
from __future__ import annotations

import numpy as np

EVAL = 0xE7A1
REFERENCE = 0x5EF0
PILOT = 0x9170
PROBES = 0x9B0B
BOOTSTRAP = 0xB007
VERIFY = 0x7E51


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)]))
