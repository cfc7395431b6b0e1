"""Portable deterministic random streams.

A splitmix64 counter stream with Box-Muller gaussians.  Everything the
package randomizes (data draws, feature frequencies, replication splits)
goes through this module so that a 64-bit seed reproduces every number
bit for bit, independent of numpy's generator internals.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_TWO53 = float(1 << 53)


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_key(key: int, index: int) -> int:
    """Child key = the (index+1)-th splitmix64 output of the parent key.

    Index-derived, not sequential: derive_key(k, i) never depends on how
    many other children were taken, so replications and pool members can
    be generated in any order.
    """
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return mix64((key + (index + 1) * _GAMMA) & _MASK)


class Stream:
    """Counter-based splitmix64 stream.

    Draws advance an internal 64-bit counter; vector draws produce the
    same values as repeated scalar draws.  ``child(i)`` derives an
    independent stream from the *creation* key (draws taken from the
    parent do not affect children).
    """

    def __init__(self, key: int):
        self.key = key & _MASK
        self._state = self.key

    def child(self, index: int) -> "Stream":
        return Stream(derive_key(self.key, index))

    def next_u64(self, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError("draw count must be nonnegative")
        with np.errstate(over="ignore"):
            counters = np.uint64(self._state) + np.uint64(_GAMMA) * np.arange(
                1, n + 1, dtype=np.uint64
            )
            z = counters
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self._state = (self._state + n * _GAMMA) & _MASK
        return z

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1) with 53-bit resolution."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) / _TWO53

    def gaussians(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller (cosine branch).

        Two uniforms per draw; u1 is shifted into (0, 1] so the log is
        always finite.
        """
        u1 = ((self.next_u64(n) >> np.uint64(11)).astype(np.float64) + 1.0) / _TWO53
        u2 = self.uniforms(n)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
