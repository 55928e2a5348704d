"""Reproducible random streams.

Every sample of a dataset owns a stream keyed by ``(master_seed, index)``.
Pipeline stages draw from named sub-streams of that stream, so the output of
sample ``i`` never depends on how many draws another sample or stage made,
nor on which worker processed it.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_word(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


@dataclass(frozen=True)
class DeterministicRng:
    """Counter-based stream factory for one sample.

    ``stage(tag)`` always returns a generator in the same initial state for
    the same tag, so each pipeline stage should request its tag once.
    """

    master_seed: int
    stream_index: int
    attempt: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if not 0 <= self.stream_index <= _MASK64:
            raise ValueError(f"stream_index must fit in 64 bits, got {self.stream_index}")

    def _entropy(self, tag: str) -> list[int]:
        seed = self.master_seed
        return [seed & 0xFFFFFFFF, seed >> 32, self.stream_index & 0xFFFFFFFF,
                self.stream_index >> 32, self.attempt, _tag_word(tag)]

    def stage(self, tag: str) -> np.random.Generator:
        ss = np.random.SeedSequence(self._entropy(tag))
        return np.random.Generator(np.random.Philox(ss))

    def retry(self, attempt: int) -> "DeterministicRng":
        """Fresh sub-stream of the same sample, used when a sample is reattempted."""
        return DeterministicRng(self.master_seed, self.stream_index, attempt)
