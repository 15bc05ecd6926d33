"""Seedable, portable random number generator.

Synthetic bundles must be bit-reproducible across platforms and library
versions, so the generator is pinned here rather than delegated: PCG
XSH-RR 64/32 (64-bit LCG state, 32-bit permuted output) with the usual
multiplier 6364136223846793005. Distinct stream ids give statistically
independent, individually seekable substreams from one seed.

Normal deviates use Leva's ratio-of-uniforms rejection method; the
quadratic-form constants below are Leva's published values.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005

# Leva (1992) bounding-curve constants for the ratio-of-uniforms method.
_LEVA_S = 0.449871
_LEVA_T = -0.386595
_LEVA_A = 0.19600
_LEVA_B = 0.25472
_LEVA_R1 = 0.27597
_LEVA_R2 = 0.27846
_TWO_SQRT_2_OVER_E = 1.7155277699214135  # 2*sqrt(2/e), width of the v-band


class Pcg32:
    """PCG XSH-RR 64/32 generator with an explicit stream id."""

    def __init__(self, seed: int, stream: int = 0):
        self.state = 0
        self.inc = (((stream << 1) | 1)) & _MASK64
        self._step()
        self.state = (self.state + (seed & _MASK64)) & _MASK64
        self._step()

    def _step(self) -> None:
        self.state = (self.state * _MULT + self.inc) & _MASK64

    def next_u32(self) -> int:
        old = self.state
        self._step()
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random mantissa bits."""
        hi = self.next_u32() >> 5   # 27 bits
        lo = self.next_u32() >> 6   # 26 bits
        return ((hi << 26) | lo) / 9007199254740992.0  # 2**53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection on the top range."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 32) - ((1 << 32) % n)
        while True:
            x = self.next_u32()
            if x < limit:
                return x % n

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian deviate via Leva's ratio-of-uniforms rejection."""
        while True:
            u = self.random()
            if u <= 0.0:
                continue
            v = _TWO_SQRT_2_OVER_E * (self.random() - 0.5)
            x = u - _LEVA_S
            y = abs(v) - _LEVA_T
            q = x * x + y * (_LEVA_A * y - _LEVA_B * x)
            if q < _LEVA_R1:
                return mu + sigma * (v / u)
            if q > _LEVA_R2:
                continue
            if v * v <= -4.0 * u * u * math.log(u):
                return mu + sigma * (v / u)

    def normals(self, n: int, mu: float = 0.0, sigma: float = 1.0) -> list[float]:
        return [self.normal(mu, sigma) for _ in range(n)]
