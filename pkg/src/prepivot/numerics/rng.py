"""Splittable counter-based random streams.

A stream is a value: a root seed plus a path of integer split indices.  The
generator for a stream is rebuilt from that pair every time, so the same
(seed, path) always yields the same draws whatever process or order asks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from prepivot.errors import ParameterError


@dataclass(frozen=True)
class RngStream:
    """Deterministic stream keyed by ``seed`` and a split ``path``."""

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if int(self.seed) < 0:
            raise ParameterError("seed must be non-negative")
        if any(int(i) < 0 for i in self.path):
            raise ParameterError("split indices must be non-negative")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def split(self, *indices: int) -> RngStream:
        """Child stream whose path extends this one by ``indices``."""
        return RngStream(self.seed, self.path + tuple(indices))

    def generator(self) -> np.random.Generator:
        """Fresh Philox generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        key = ss.generate_state(2, dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))
