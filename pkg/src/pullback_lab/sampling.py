"""Deterministic sample streams.

`SplitMix64` is the seeded random source for every harness experiment; it is
fully specified by its seed so the streams can be reproduced in any language.
Low-discrepancy points for the sampled validators come from an unscrambled
Halton sequence.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import qmc

_MASK = (1 << 64) - 1
_TWO64 = float(1 << 64)
_BELOW_ONE = math.nextafter(1.0, 0.0)


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Next value in [0, 1): the 64-bit output divided by 2**64."""
        # correctly rounded division can land on 1.0 for outputs near 2**64
        return min(self.next_u64() / _TWO64, _BELOW_ONE)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def unit_cube(self, n: int, dim: int) -> np.ndarray:
        return np.array([[self.random() for _ in range(dim)] for _ in range(n)]).reshape(n, dim)


def halton(n: int, dim: int) -> np.ndarray:
    """First `n` points of the unscrambled Halton sequence in [0,1)^dim (origin skipped)."""
    engine = qmc.Halton(d=dim, scramble=False)
    engine.fast_forward(1)
    return engine.random(n)
