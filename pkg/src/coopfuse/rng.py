"""Counter-based deterministic random streams.

Every stochastic component of the simulator (channel noise, fading,
shadowing, scene synthesis, parameter initialization) draws from an
:class:`RngStream` derived from a single scenario seed plus a tuple of
stream tags.  Streams are counter-based: sample ``i`` is a pure function
of ``(key, i)``, so independently-tagged streams never interact and a
sweep can evaluate its points in any order (or concurrently) without
changing a single bit of output.

Generator: 64-bit splitmix finalizer over a golden-ratio counter;
Gaussians via Box-Muller on the uniform output.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(x: int) -> int:
    """Splitmix64 finalizer on a Python int, mod 2^64."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return (x ^ (x >> 31)) & _MASK


def _mix_u64(z: np.ndarray) -> np.ndarray:
    # Vectorized finalizer; uint64 arithmetic wraps mod 2^64 by design.
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def _fnv1a64(s: str) -> int:
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK
    return h


class RngStream:
    """One independent, reproducible random stream.

    Values depend only on the stream key and the number of samples already
    drawn, never on global state.
    """

    def __init__(self, key: int) -> None:
        self._key = key & _MASK
        self._count = 0

    @property
    def key(self) -> int:
        return self._key

    def spawn(self, *tags: int | str) -> "RngStream":
        """Derive an independent child stream from additional tags."""
        key = self._key
        for tag in tags:
            t = _fnv1a64(tag) if isinstance(tag, str) else int(tag) & _MASK
            key = _mix(key ^ _mix(t))
        return RngStream(key)

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        with np.errstate(over="ignore"):
            return _mix_u64(np.uint64(self._key) + idx * np.uint64(_GAMMA))

    def uniform(self, n: int) -> np.ndarray:
        """n doubles uniform on (0, 1]."""
        return ((self._raw(n) >> np.uint64(11)) + np.uint64(1)) * 2.0**-53

    def normal(self, shape: int | tuple[int, ...] = 1) -> np.ndarray:
        """Standard normal samples via Box-Muller."""
        if isinstance(shape, int):
            shape = (shape,)
        n = 1
        for s in shape:
            n *= s
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[:pairs]))
        theta = 2.0 * np.pi * u[pairs:]
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return z.reshape(shape)


def stream(seed: int, *tags: int | str) -> RngStream:
    """Root constructor: stream for (seed, tags...)."""
    return RngStream(_mix(seed)).spawn(*tags)
