"""Portable seeded normal draws.

Raw 64-bit words come from numpy's PCG64 bit generator, whose output stream
is fixed for a given seed across numpy releases. Normals are produced from
those words with the Box-Muller transform implemented here, so the mapping
from seed to coefficient vector does not depend on numpy's (versioned)
ziggurat sampler.

Per-realization seeds are derived with a SplitMix64 finalizer::

    seed_r = splitmix64(base_seed ^ ((r * GOLDEN_GAMMA) mod 2**64))
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL2 = 0x94D049BB133111EB


def splitmix64(x):
    """SplitMix64 output function (Steele, Lea & Flood 2014) on a 64-bit int."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * SPLITMIX_MUL1) & MASK64
    z = ((z ^ (z >> 27)) * SPLITMIX_MUL2) & MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed, index):
    """Seed for ensemble member ``index``; independent of any other ordering."""
    if index < 0:
        raise ValueError("index must be nonnegative")
    return splitmix64((base_seed & MASK64) ^ ((index * GOLDEN_GAMMA) & MASK64))


def standard_normals(seed, count):
    """Return ``count`` N(0, 1) draws determined entirely by ``seed``.

    Each pair of raw words (x1, x2) gives u1 = (x1 >> 11 + 1) / 2**53 in (0, 1]
    and u2 = (x2 >> 11) / 2**53 in [0, 1); the pair of outputs is
    sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2), emitted cos first.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    npairs = (count + 1) // 2
    raw = np.random.PCG64(seed & MASK64).random_raw(2 * npairs)
    raw = raw.reshape(npairs, 2) >> np.uint64(11)
    u1 = (raw[:, 0].astype(np.float64) + 1.0) * 2.0**-53
    u2 = raw[:, 1].astype(np.float64) * 2.0**-53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * npairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]
