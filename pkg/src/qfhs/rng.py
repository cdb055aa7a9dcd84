"""Deterministic random-stream derivation.

Every stochastic routine in the package draws from a `numpy.random.Generator`
obtained through `substream`, so replicates, bootstrap resamples and
simulation paths get independent streams that do not depend on execution
order or parallelism.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["substream", "stream_key"]


def stream_key(label: str) -> int:
    """Stable 32-bit key for a textual stream label."""
    return zlib.crc32(label.encode("utf-8"))


def substream(seed: int, *keys: int | str) -> np.random.Generator:
    """Generator for the (seed, *keys) substream.

    Keys may be ints or strings; strings are hashed with CRC-32 so the
    mapping is stable across processes and platforms.
    """
    entropy = [int(seed)]
    for k in keys:
        entropy.append(stream_key(k) if isinstance(k, str) else int(k))
    return np.random.default_rng(np.random.SeedSequence(entropy))
