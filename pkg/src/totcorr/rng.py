"""Seeded, splittable random streams.

Each :class:`RngState` is a Philox counter-based generator keyed by a 64-bit
seed plus a *path* of substream indices. ``rng.spawn(i)`` derives the child
stream ``path + (i,)`` without touching the parent, so a parallel job that
gives task ``i`` the stream ``spawn(i)`` gets the same numbers whatever the
scheduling.

Gaussians are drawn with Box-Muller on the uniform output instead of the
library's ziggurat sampler, which keeps the normal stream a simple function
of the uniform stream.
"""

from __future__ import annotations

import numpy as np

from .errors import ParamOutOfRange

SEED_MAX = 2**64


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_MAX:
        raise ParamOutOfRange(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class RngState:
    """Single-owner random stream. Never share one instance between workers."""

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = _check_seed(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, path={self.path})"

    def spawn(self, *index: int) -> "RngState":
        return RngState(self.seed, self.path + tuple(index))

    def uniform(self, size=None) -> np.ndarray:
        """Uniform samples on [0, 1)."""
        return self._gen.random(size)

    def normal(self, size) -> np.ndarray:
        """Standard real normals via Box-Muller."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        m = (n + 1) // 2
        u1 = 1.0 - self._gen.random(m)  # (0, 1], keeps log finite
        u2 = self._gen.random(m)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
        return z[:n].reshape(shape)

    def complex_normal(self, size) -> np.ndarray:
        """Standard complex normals, E|z|^2 = 1."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        z = self.normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def as_rng(rng) -> RngState:
    """Accept an :class:`RngState` or a bare integer seed."""
    if isinstance(rng, RngState):
        return rng
    return RngState(rng)
