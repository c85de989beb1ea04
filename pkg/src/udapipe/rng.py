"""Seeded, portable random streams.

Every stream is identified by an integer seed and a purpose tag (a short
string such as ``"split/class1"``). Values come from the SplitMix64
finalizer applied to a counter, so the i-th draw of a stream is a pure
function of ``(seed, tag, i)`` and can be reproduced in any language with
64-bit wrapping arithmetic.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(x):
    """SplitMix64 finalizer on a Python int, wrapping at 64 bits."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix_array(z):
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def fnv1a64(text):
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def stream_key(seed, tag):
    return splitmix64((int(seed) & MASK64) ^ fnv1a64(tag))


class Stream:
    """A counter-based SplitMix64 stream.

    >>> s = Stream(42, "demo")
    >>> u = s.uniform(3)
    >>> bool(((u >= 0) & (u < 1)).all())
    True
    """

    def __init__(self, seed, tag):
        self.seed = int(seed)
        self.tag = tag
        self._key = stream_key(seed, tag)
        self._counter = 0

    def raw(self, n):
        """Next ``n`` 64-bit outputs as ``uint64``."""
        start = self._counter
        self._counter += n
        counters = np.arange(start + 1, start + n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            state = np.uint64(self._key) + counters * np.uint64(GOLDEN_GAMMA)
            return _mix_array(state)

    def uniform(self, n):
        """``n`` doubles in [0, 1) built from the top 53 bits."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def normal(self, size):
        """Standard normal draws via Box-Muller on pairs of uniforms."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        u1 = 1.0 - u[:m]  # (0, 1], keeps log finite
        u2 = u[m:]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
        return z[:n].reshape(shape)

    def permutation(self, n):
        """Random permutation of ``range(n)`` by sorting uniform keys."""
        keys = self.raw(n)
        return np.argsort(keys, kind="stable")
