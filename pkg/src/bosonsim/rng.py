"""Deterministic pseudo-random streams used throughout the package.

Event sampling draws its uniforms from SplitMix64 run in counter mode, so
every stream is a pure function of ``(seed, index)`` and disjoint index
ranges can be generated independently (and in parallel) without changing
the result.  The constants and the derived-seed mixing function are
normative and listed in FORMATS.md; reference output words for seed 0 are
pinned in the test suite.

Gaussian variates (Haar draws, measurement noise) come from numpy's Philox
counter-based bit generator keyed by the seed.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB

# 2**-53, converts a 53-bit word to a uniform in [0, 1)
_U53 = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit word (David Stafford's mix 13)."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def word(seed: int, index: int) -> int:
    """The ``index``-th 64-bit output of SplitMix64 seeded with ``seed``."""
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


def uniform53(seed: int, index: int) -> float:
    """Uniform double in [0, 1) from the top 53 bits of `word(seed, index)`."""
    return (word(seed, index) >> 11) * _U53


def hash64(a: int, b: int) -> int:
    """Derived-stream seed: mixes a base seed with a stream index.

    Used wherever an ensemble or a batch of samples needs one independent
    stream per element (``draw_seed = hash64(base_seed, draw_index)``).
    """
    return mix64((mix64((a + GOLDEN) & MASK64) + (b * MIX_1)) & MASK64)


def words(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized `word(seed, start + k)` for k in [0, count)."""
    ks = np.arange(start, start + count, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + (ks + np.uint64(1)) * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Vectorized uniform doubles in [0, 1), one per counter index."""
    return (words(seed, start, count) >> np.uint64(11)).astype(np.float64) * _U53


def gaussian_generator(seed: int) -> np.random.Generator:
    """numpy Generator backed by Philox keyed with ``seed``.

    Philox is counter-based, so the raw stream is stable across numpy
    releases; it supplies the normal variates for Haar draws and noise.
    """
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
