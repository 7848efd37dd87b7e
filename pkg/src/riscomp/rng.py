"""Seeded, splittable random streams.

Every stream is a Philox4x64 counter-based generator keyed by the pair
``(seed, stream_id)``. Two streams with the same key replay the same
sequence; streams with different keys are independent without any
sequential warm-up, so trials can be executed in any order.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

_U64 = (1 << 64) - 1


class Purpose(IntEnum):
    """Fixed purpose tags mixed into the stream id of a trial.

    Changing how one noise source is consumed never perturbs another.
    """

    CHANNEL = 0
    PSN = 1
    RANDOM_CONFIG = 2
    RANDOM_COMPENSATOR = 3
    GRADCHECK = 4


_PURPOSE_BITS = 8


def trial_stream_id(trial: int, purpose: int) -> int:
    """Stream id of ``purpose`` within ``trial``: ``trial << 8 | purpose``."""
    if trial < 0 or not 0 <= int(purpose) < (1 << _PURPOSE_BITS):
        raise ValueError(f"invalid trial/purpose pair ({trial}, {purpose})")
    return ((int(trial) << _PURPOSE_BITS) | int(purpose)) & _U64


class RandomStream:
    """A reproducible stream of variates addressed by ``(seed, stream_id)``.

    The stream counts the variates it has produced (``draws``), which the
    harness uses to check that paired evaluations consumed identical noise.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed <= _U64 or not 0 <= stream_id <= _U64:
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self.draws = 0

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id}, draws={self.draws})"

    def _count(self, size) -> None:
        self.draws += 1 if size is None else int(np.prod(size))

    def uniform(self, lo: float = 0.0, hi: float = 1.0, size=None):
        """Uniform variates on ``[lo, hi)``."""
        if not lo < hi:
            raise ValueError(f"uniform range requires lo < hi, got [{lo}, {hi})")
        self._count(size)
        u = self._gen.random(size)
        out = lo + (hi - lo) * u
        # lo + (hi-lo)*u can round up to hi for u close to 1
        return np.minimum(out, np.nextafter(hi, lo)) if size is not None else min(out, np.nextafter(hi, lo))

    def standard_normal(self, size=None):
        self._count(size)
        return self._gen.standard_normal(size)

    def complex_normal(self, size=None, power: float = 1.0):
        """Circularly-symmetric complex Gaussian with ``E|z|^2 = power``."""
        re = self.standard_normal(size)
        im = self.standard_normal(size)
        return np.sqrt(power / 2.0) * (re + 1j * im)


def make_stream(seed: int, stream_id: int = 0) -> RandomStream:
    return RandomStream(seed, stream_id)


def draw_uniform(s: RandomStream, lo: float, hi: float, size=None):
    return s.uniform(lo, hi, size)


def draw_standard_normal(s: RandomStream, size=None):
    return s.standard_normal(size)
