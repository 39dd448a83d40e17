"""Deterministic random substreams built on the counter-based Philox generator.

Every random draw in this package goes through `substream`, keyed by a base
seed plus a purpose tag (and optional indices).  Identical keys always yield
identical streams, independently of call order, which is what makes operators,
planted models and trial initializations bit-reproducible.
"""

import zlib

import numpy as np


def _key_part(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFF


def substream(seed, *key):
    """Independent `numpy.random.Generator` keyed by (seed, *key).

    `key` parts may be strings (purpose tags) or integers (trial/event
    indices).  The same (seed, key) always reproduces the same stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(_key_part(p) for p in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """Derive a child 64-bit seed for APIs that accept plain integer seeds."""
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(_key_part(p) for p in key))
    return int(ss.generate_state(1, np.uint64)[0])
