"""Portable, seedable pseudo-random numbers.

Every stochastic choice in this package (synthetic trajectories, weight
initialization, batch shuffling, dropout masks, negative subsampling)
goes through :class:`PortableRng` so that a fixed seed gives bit-identical
results on every platform and numpy version.

The generator is SplitMix64 used in counter mode: output ``i`` is
``mix64((seed + i * GAMMA) mod 2**64)`` where ``mix64`` is the finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

and ``GAMMA = 0x9E3779B97F4A7C15``.  Because the state is a plain counter,
blocks of outputs can be produced with vectorized uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer (scalar path)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX_A)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX_B)
    return z ^ (z >> np.uint64(31))


class PortableRng:
    """Deterministic random stream identified by a 64-bit seed.

    Scalar draws and vectorized draws consume the same counter stream, so
    the sequence of values depends only on the seed and the order of calls.
    """

    def __init__(self, seed: int):
        self._seed = int(seed) & _MASK64
        self._count = 0

    @property
    def seed(self) -> int:
        return self._seed

    def spawn(self, key: int) -> "PortableRng":
        """Derive an independent child stream from an integer key.

        The child seed is ``mix64((seed ^ mix64(key)) + GAMMA)``; the parent
        counter is untouched, so spawning is order-independent.
        """
        child = mix64(((self._seed ^ mix64(int(key))) + _GAMMA) & _MASK64)
        return PortableRng(child)

    # -- raw outputs ------------------------------------------------------

    def _raw_scalar(self) -> int:
        self._count += 1
        return mix64((self._seed + self._count * _GAMMA) & _MASK64)

    def raw64(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit outputs as a uint64 array."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        z = np.uint64(self._seed) + idx * np.uint64(_GAMMA)
        return _mix64_vec(z)

    # -- distributions ----------------------------------------------------

    def uniform(self, size=None):
        """Uniform float64 in [0, 1): ``(raw >> 11) * 2**-53``."""
        if size is None:
            return (self._raw_scalar() >> 11) * _INV_2_53
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        out = (self.raw64(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        return out.reshape(shape)

    def normal(self, size=None):
        """Standard normals via Box-Muller on uniform pairs."""
        if size is None:
            return float(self.normal(1)[0])
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        m = (n + 1) // 2
        # u1 in (0, 1] so the log is finite
        u1 = ((self.raw64(m) >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
        u2 = (self.raw64(m) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return z.reshape(shape)

    def integers(self, upper: int, size=None):
        """Integers in [0, upper) by modulo reduction of raw outputs."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        if size is None:
            return self._raw_scalar() % upper
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        out = (self.raw64(n) % np.uint64(upper)).astype(np.int64)
        return out.reshape(shape)

    def shuffle(self, x) -> None:
        """In-place Fisher-Yates shuffle of a list or 1-d array."""
        for i in range(len(x) - 1, 0, -1):
            j = self._raw_scalar() % (i + 1)
            x[i], x[j] = x[j], x[i]

    def permutation(self, n: int) -> np.ndarray:
        idx = np.arange(n)
        self.shuffle(idx)
        return idx
