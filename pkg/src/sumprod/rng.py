"""Seeded substreams.

Every random draw in the package comes from a Philox generator keyed by a
hash of ``(seed, label, ...)``, so components and trials get independent,
replayable streams from one user seed.
"""

import hashlib

import numpy as np


def derive_key(seed: int, *labels) -> int:
    text = repr((int(seed),) + tuple(str(x) for x in labels)).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "little")


def substream(seed: int, *labels) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *labels)))
