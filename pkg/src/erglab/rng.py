"""Counter-based uniform random numbers.

Every value is a pure function of (seed, stream, index), so trials can
be generated in any order, on any worker, with identical results. The
mixer is the splitmix64 finalizer; streams are separated by offsetting
the counter with the 64-bit golden ratio before mixing.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    """Collapse (seed, stream) into one 64-bit key. The stream index is
    mixed in, not just added, so neighboring streams share nothing."""
    return mix64(((seed & MASK64) + ((stream + 1) * GOLDEN)) & MASK64)


def uniform_at(seed: int, stream: int, index: int) -> float:
    """The index-th uniform of the (seed, stream) sequence, in [0, 1)."""
    key = stream_key(seed, stream)
    z = mix64((key + ((index + 1) * GOLDEN)) & MASK64)
    return (z >> 11) * 2.0**-53


def uniforms(seed: int, stream: int, count: int) -> np.ndarray:
    """Vectorized uniform_at(seed, stream, 0..count-1) as float64."""
    key = np.uint64(stream_key(seed, stream))
    golden = np.uint64(GOLDEN)
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = key + idx * golden
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53
