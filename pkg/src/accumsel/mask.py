"""Fixed-width feature masks backed by a Python int."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


@dataclass(frozen=True, order=True)
class FeatureMask:
    """A subset of ``range(width)``; bit ``i`` set means feature ``i`` is in.

    Masks are immutable and hashable so they can key score caches.
    """

    width: int
    bits: int = 0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"mask width must be non-negative, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(f"bits {self.bits:#x} out of range for width {self.width}")

    @classmethod
    def empty(cls, width: int) -> FeatureMask:
        return cls(width, 0)

    @classmethod
    def full(cls, width: int) -> FeatureMask:
        return cls(width, (1 << width) - 1)

    @classmethod
    def from_indices(cls, width: int, indices: Iterable[int]) -> FeatureMask:
        bits = 0
        for i in indices:
            i = int(i)
            if not 0 <= i < width:
                raise ValueError(f"feature index {i} out of range for width {width}")
            bits |= 1 << i
        return cls(width, bits)

    @classmethod
    def from_bitstring(cls, text: str) -> FeatureMask:
        """Parse ``"1010"``; character ``i`` is feature ``i``."""
        text = text.strip()
        if any(c not in "01" for c in text):
            raise ValueError(f"not a bitstring: {text!r}")
        return cls.from_indices(len(text), (i for i, c in enumerate(text) if c == "1"))

    def bitstring(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.width))

    def __contains__(self, i: object) -> bool:
        return isinstance(i, (int, np.integer)) and 0 <= i < self.width and bool(self.bits >> int(i) & 1)

    def __iter__(self) -> Iterator[int]:
        return (i for i in range(self.width) if self.bits >> i & 1)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def indices(self) -> np.ndarray:
        return np.fromiter(iter(self), dtype=np.intp)

    def as_bool(self) -> np.ndarray:
        out = np.zeros(self.width, dtype=bool)
        out[self.indices()] = True
        return out

    def complement(self) -> FeatureMask:
        return FeatureMask(self.width, ((1 << self.width) - 1) ^ self.bits)

    def with_feature(self, i: int) -> FeatureMask:
        self._check(i)
        return FeatureMask(self.width, self.bits | (1 << i))

    def without(self, i: int) -> FeatureMask:
        self._check(i)
        return FeatureMask(self.width, self.bits & ~(1 << i))

    def _check(self, i: int) -> None:
        if not 0 <= i < self.width:
            raise ValueError(f"feature index {i} out of range for width {self.width}")

    def __repr__(self) -> str:
        return f"FeatureMask({self.bitstring()!r})"
