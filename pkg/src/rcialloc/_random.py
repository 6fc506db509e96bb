"""Seeded, stream-separated random generators.

All randomness comes from numpy's Philox4x64 counter-based generator keyed
by ``(seed, stream)``, so every entity kind draws from its own stream.
"""

import numpy as np

STREAM_POSITIONS = 0
STREAM_Q = 1
STREAM_B = 2
STREAM_JITTER = 3
STREAM_BASELINE = 4


def make_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))
