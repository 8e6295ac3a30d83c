"""Deterministic random streams.

Every random quantity in the package is drawn from an :class:`RngStream`,
identified by a master seed and a stream index. Streams for nested
experiment cells are derived from hierarchical integer labels with a
SplitMix64 avalanche mix, so results never depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 finalizer step on a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            value = getattr(self, name)
            if not 0 <= value <= MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=[self.master_seed, self.stream_index])
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, *labels: int) -> "RngStream":
        return derive_stream(self.master_seed, (self.stream_index, *labels))


def derive_stream(master_seed: int, labels: Iterable[int]) -> RngStream:
    """Fold ``labels`` into a stream index for ``master_seed``.

    Each label is absorbed with a full SplitMix64 round, so changing any
    single label changes the index (and hence the stream) completely.
    """
    state = splitmix64(master_seed & MASK64)
    for label in labels:
        state = splitmix64(state ^ (int(label) & MASK64))
    return RngStream(master_seed & MASK64, state)


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()
