"""Deterministic random stream for cross-implementation-reproducible suites.

SplitMix64 drives everything: the state advances by a fixed odd
constant per draw, so the k-th output is a pure function of
(seed, k) and bulk generation can be vectorized without changing the
stream. Uniforms take the top 53 bits; normals are Box-Muller cosine
variates, one fresh (u1, u2) pair per draw with the sine partner
discarded.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class Rng:
    """SplitMix64 generator with uniform and normal draws."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform draw in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        """Standard normal via Box-Muller; u1 is redrawn if it is exactly 0."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def _bulk_u64(self, count: int) -> np.ndarray:
        idx = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(self.state) + idx * np.uint64(_GAMMA)
        self.state = (self.state + count * _GAMMA) & _MASK
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniforms(self, count: int) -> np.ndarray:
        """Vectorized ``uniform``; identical stream to repeated scalar calls."""
        return (self._bulk_u64(count) >> np.uint64(11)) * 2.0**-53

    def normals(self, count: int) -> np.ndarray:
        """Vectorized ``normal``; identical stream to repeated scalar calls.

        The fast path assumes no u1 draw is exactly zero (probability
        2^-53 per draw); if one is, it rewinds and falls back to the
        scalar loop so redraw semantics stay exact.
        """
        start_state = self.state
        u = self.uniforms(2 * count)
        u1 = u[0::2]
        if np.any(u1 == 0.0):
            self.state = start_state
            return np.array([self.normal() for _ in range(count)])
        u2 = u[1::2]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
