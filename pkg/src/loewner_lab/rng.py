"""Seed handling for reproducible (and parallelizable) random sampling.

All randomness in the package flows through counter-style Philox streams
keyed by a 64-bit value derived from the user seed.  Monte Carlo replica i
of a run with master seed s draws from the stream keyed by ``mix(s, i)``,
so a replica's sample depends on (seed, replica index) alone: partitioning
replicas across threads, or re-running on another machine, cannot change
any individual sample.

The mixing function is SplitMix64 (Steele/Lea/Flood), applied to the seed
and then to seed-hash + index.  It is a bijection on 64-bit words, so
distinct replica indices always get distinct stream keys.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 finalizer step; bijective on 64-bit integers."""
    x = (x + _GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix(seed: int, index: int) -> int:
    """Derive the 64-bit stream key for replica `index` of master `seed`."""
    return splitmix64((splitmix64(seed & _MASK64) + (index & _MASK64)) & _MASK64)


def stream(seed: int) -> np.random.Generator:
    """Philox generator for a (derived) 64-bit seed value."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def replica_stream(seed: int, index: int) -> np.random.Generator:
    return stream(mix(seed, index))
