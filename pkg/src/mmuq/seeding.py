"""Deterministic RNG streams keyed by experiment coordinates.

Every stochastic stage owns a generator derived from the experiment seed
plus a tuple of coordinates (stage name, model, prior, dataset size, ...),
so results never depend on execution order or worker count.
"""

from __future__ import annotations

import zlib

import numpy as np


def _encode(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"rng keys must be non-negative, got {key}")
        return int(key)
    raise TypeError(f"rng keys must be int or str, got {type(key).__name__}")


def rng_for(seed: int, *keys: int | str) -> np.random.Generator:
    """Generator for the stream identified by (seed, *keys).

    Same inputs give bit-identical streams on any platform; distinct key
    tuples give statistically independent streams.
    """
    entropy = [_encode(seed)] + [_encode(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
