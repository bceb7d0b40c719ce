"""Empirical distributions and reproducible random streams.

Random numbers come from Philox4x64-10 (a counter-based generator, as in
Salmon et al., SC'11), keyed by the 128-bit value ``seed | stream_id << 64``.
Uniform doubles are the top 53 bits of each 64-bit output scaled by 2**-53,
which is what ``numpy.random.Generator.random`` does for any bit generator.
A stream therefore depends only on ``(seed, stream_id)``, never on the order
in which other streams were consumed.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from .errors import AllZeroWeights, EmptyDistribution

MASK64 = (1 << 64) - 1


def stream_id(*parts) -> int:
    """Stable 64-bit stream id for a tuple of labels/ints.

    BLAKE2b over the ``/``-joined decimal/str forms, read little-endian.
    """
    key = "/".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def pair_stream_id(node_a: int, node_b: int) -> int:
    a, b = (node_a, node_b) if node_a <= node_b else (node_b, node_a)
    return stream_id("pair", a, b)


class RngStream:
    """One independent, single-owner sequence of uniforms in [0, 1)."""

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & MASK64
        self.stream_id = int(stream_id) & MASK64
        bitgen = np.random.Philox(key=self.seed | (self.stream_id << 64))
        self._gen = np.random.Generator(bitgen)

    def random(self, size=None):
        return self._gen.random(size)

    def permutation(self, n: int) -> np.ndarray:
        # Fisher-Yates driven by our own uniforms; independent of numpy's shuffle internals.
        perm = np.arange(n)
        if n < 2:
            return perm
        u = self.random(n - 1)
        for i in range(n - 1, 0, -1):
            j = min(int(u[n - 1 - i] * (i + 1)), i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed:#x}, stream_id={self.stream_id:#x})"


class EmpiricalDistribution:
    """Step-function distribution over an observed sample set."""

    __slots__ = ("samples",)

    def __init__(self, samples: Sequence[int]):
        arr = np.sort(np.asarray(samples, dtype=np.int64).reshape(-1))
        if not len(arr):
            raise EmptyDistribution()
        arr.setflags(write=False)
        self.samples = arr

    def __len__(self) -> int:
        return len(self.samples)

    def cdf(self, x):
        """Fraction of samples ``<= x``; works elementwise on arrays."""
        counts = np.searchsorted(self.samples, x, side="right")
        return counts / len(self.samples)

    def quantile(self, u):
        """Left-continuous empirical inverse: ``samples[floor(u * n)]``."""
        n = len(self.samples)
        idx = np.floor(np.asarray(u, dtype=np.float64) * n).astype(np.int64)
        idx = np.clip(idx, 0, n - 1)
        out = self.samples[idx]
        return int(out) if out.ndim == 0 else out

    def sample(self, rng: RngStream, size=None):
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        return float(self.samples.mean())


def ecdf_eval(dist: EmpiricalDistribution, x: int) -> float:
    return float(dist.cdf(x))


def sample_inverse_transform(dist: EmpiricalDistribution, rng: RngStream) -> int:
    return dist.sample(rng)


class WeightedChooser:
    """Repeated draws of an index with probability ``w[i] / sum(w)``."""

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(w) == 0 or np.any(w < 0) or not np.any(w > 0):
            if np.any(w < 0):
                raise ValueError("weights must be non-negative")
            raise AllZeroWeights()
        self.cumulative = np.cumsum(w)
        self.total = self.cumulative[-1]
        self._last_positive = int(np.flatnonzero(w > 0)[-1])

    def pick(self, u):
        idx = np.searchsorted(self.cumulative, np.asarray(u) * self.total, side="right")
        # u * total can round up to total itself
        idx = np.minimum(idx, self._last_positive)
        return int(idx) if idx.ndim == 0 else idx

    def draw(self, rng: RngStream, size=None):
        return self.pick(rng.random(size))


def weighted_choice(weights: Sequence[float], rng: RngStream) -> int:
    return WeightedChooser(weights).draw(rng)
