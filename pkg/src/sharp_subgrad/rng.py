"""Deterministic random stream used by every generator in this package.

The single named generator is SplitMix64 (Steele, Lea & Flood's 64-bit
mixer).  All randomness flows through it so that identical seeds give
componentwise-identical problem instances on any platform running the same
build:

* ``uniform``    draws in [0, 1) as ``(state_bits >> 11) * 2**-53``,
* ``normal``     uses Box-Muller on two consecutive uniforms (one normal
  per pair; the sine partner is discarded),
* substreams are derived by remixing the base seed with a tag, never by
  seed arithmetic, so neighbouring user seeds cannot collide.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # unsigned array arithmetic wraps mod 2^64, matching the scalar mixer
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """SplitMix64 stream with scalar and vector draws."""

    def __init__(self, seed: int):
        self._seed = int(seed) & _MASK64
        self._state = self._seed

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def uniform(self) -> float:
        # 53-bit mantissa division, exactly representable in a double
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniform_open(self) -> float:
        """Uniform on (0, 1]."""
        return 1.0 - self.uniform()

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def _raw(self, k: int) -> np.ndarray:
        if k <= 0:
            return np.empty(0, dtype=np.uint64)
        steps = np.arange(1, k + 1, dtype=np.uint64) * np.uint64(_GOLDEN)
        states = np.uint64(self._state) + steps
        self._state = int(states[-1])
        return _mix64_array(states)

    def uniforms(self, k: int) -> np.ndarray:
        return (self._raw(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normals(self, k: int) -> np.ndarray:
        u = self.uniforms(2 * k)
        u1 = 1.0 - u[0::2]
        u2 = u[1::2]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def spawn(self, tag: int) -> "SplitMix64":
        """Independent substream keyed on the construction seed, not on how
        much of this stream has been consumed."""
        return SplitMix64(_mix64(self._seed ^ _mix64((tag + 1) * _GOLDEN)))


def stream_for(seed: int, tag: int = 0) -> SplitMix64:
    """Canonical instance stream for a (seed, tag) pair."""
    if tag == 0:
        return SplitMix64(seed)
    return SplitMix64(seed).spawn(tag)
