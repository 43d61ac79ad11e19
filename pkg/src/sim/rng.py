from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..shared.errors import UsageError

SEED_LIMIT = 2**64


@dataclass(frozen=True)
class SeededRNG:
    """Counter-based (Philox) generator addressed by a root seed and a key path.

    `fork(i)` derives an independent stream for step or shard `i`, so work can
    be split in any order and still draw the same numbers.
    """
    seed: int
    path: Tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.seed < SEED_LIMIT:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if any(k < 0 for k in self.path):
            raise UsageError("stream keys must be non-negative")
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.path)
        object.__setattr__(self, "generator", np.random.Generator(np.random.Philox(sequence)))

    def fork(self, *keys: int) -> "SeededRNG":
        return SeededRNG(self.seed, self.path + tuple(int(k) for k in keys))
