"""Deterministic pseudo-random primitives shared by pattern scrambling and sensor noise.

Everything here is counter-based: the i-th output is a pure function of
(seed, i), so results never depend on call order, chunking, or worker count.

The generator is the SplitMix64 recurrence.  The i-th 64-bit word is

    mix(seed + (i + 1) * 0x9E3779B97F4A7C15)

where mix(z) xors/multiplies with the constants 0xBF58476D1CE4E5B9 and
0x94D049BB133111EB and finishes with z ^ (z >> 31).  All arithmetic is
modulo 2**64.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)

_U64 = np.uint64


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * MIX1
    z = (z ^ (z >> _U64(27))) * MIX2
    return z ^ (z >> _U64(31))


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Return `count` consecutive 64-bit outputs, starting at stream position `offset`."""
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    state = _U64(seed & 0xFFFFFFFFFFFFFFFF) + idx * GAMMA
    return _mix(state)


def uniform01(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Uniform floats in (0, 1), one per counter position; exactly reproducible."""
    words = splitmix64(seed, count, offset)
    return (words.astype(np.float64) + 0.5) / 2.0**64


def permutation(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates shuffle of [0, n) driven by the SplitMix64 stream.

    The swap index for step i (i = n-1 .. 1) is word[n-1-i] mod (i+1).
    Same (n, seed) gives the same permutation on every platform.
    """
    if n < 1:
        raise ValueError("permutation size must be >= 1")
    perm = np.arange(n, dtype=np.int64)
    if n == 1:
        return perm
    words = splitmix64(seed, n - 1)
    for k, i in enumerate(range(n - 1, 0, -1)):
        j = int(words[k] % _U64(i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def gaussian_field(seed: int, shape: tuple, sigma: float, stream: int = 0) -> np.ndarray:
    """Standard-normal field scaled by sigma, keyed on (seed, stream, cell index).

    Box-Muller on two counter-indexed uniforms; `stream` separates independent
    fields (e.g. one per view) under the same seed.
    """
    n = int(np.prod(shape))
    if sigma == 0.0 or n == 0:
        return np.zeros(shape, dtype=np.float64)
    base = 2 * n * stream
    u1 = uniform01(seed, n, offset=base)
    u2 = uniform01(seed, n, offset=base + n)
    g = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return (sigma * g).reshape(shape)
