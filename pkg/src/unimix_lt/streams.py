"""Named, reproducible random streams.

Every piece of randomness in the package flows from a single 64-bit seed.
Independent streams are derived from (seed, label, ...) so that e.g. the
batch sampler and the mixing-factor draws never share state, and parallel
Monte Carlo chunks merge deterministically.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_rng(seed: int, *labels: int | str) -> np.random.Generator:
    """Generator for the stream identified by (seed, *labels).

    String labels are hashed with CRC32; integer labels are used as-is.
    The same (seed, labels) pair always yields the same stream.
    """
    words = [int(seed) & _MASK64]
    for label in labels:
        if isinstance(label, str):
            words.append(zlib.crc32(label.encode("utf-8")))
        else:
            words.append(int(label) & _MASK64)
    return np.random.default_rng(np.random.SeedSequence(words))
