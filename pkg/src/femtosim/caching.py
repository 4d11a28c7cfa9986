"""Decentralized random cache placement, uncoded and GF(2)-coded."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import FrozenSet, Tuple

import numpy as np

from .gf2 import BitVector, SpanTracker, random_bits

__all__ = [
    "CachePolicy",
    "UncodedCache",
    "CodedCache",
    "place_uncoded",
    "place_coded",
    "uncoded_hit",
    "coded_contribute",
]


class CachePolicy(str, enum.Enum):
    UNCODED = "uncoded"
    CODED = "coded"


def _check_sizes(h: int, M: int) -> None:
    if h < 1:
        raise ValueError(f"popular set size must be >= 1, got {h}")
    if M < 1:
        raise ValueError(f"cache size must be >= 1, got {M}")


@dataclass(frozen=True)
class UncodedCache:
    """Distinct content indices, each in ``1..h``."""

    contents: FrozenSet[int]

    def __contains__(self, r: int) -> bool:
        return r in self.contents

    def __len__(self) -> int:
        return len(self.contents)


@dataclass(frozen=True)
class CodedCache:
    """``M`` random GF(2) combinations of the ``h`` popular contents."""

    h: int
    rows: Tuple[int, ...]

    @property
    def M(self) -> int:
        return len(self.rows)

    def vectors(self):
        return [BitVector(self.h, r) for r in self.rows]


def place_uncoded(h: int, M: int, rng: np.random.Generator) -> UncodedCache:
    """Cache ``min(M, h)`` distinct contents chosen uniformly from ``1..h``."""
    _check_sizes(h, M)
    if M >= h:
        return UncodedCache(frozenset(range(1, h + 1)))
    picks = rng.choice(h, size=M, replace=False) + 1
    return UncodedCache(frozenset(picks.tolist()))


def place_coded(h: int, M: int, rng: np.random.Generator) -> CodedCache:
    """Cache ``M`` independent density-1/2 combinations; zero or repeated rows are kept."""
    _check_sizes(h, M)
    return CodedCache(h, tuple(random_bits(h, rng, M)))


def uncoded_hit(cache: UncodedCache, r: int) -> bool:
    if r < 1:
        raise ValueError(f"content indices start at 1, got {r}")
    return r in cache.contents


def coded_contribute(cache: CodedCache, tracker: SpanTracker) -> int:
    """Offer every row of ``cache`` to ``tracker``; return how many raised the rank."""
    if cache.h != tracker.dimension:
        raise ValueError(
            f"cache dimension {cache.h} does not match tracker dimension {tracker.dimension}"
        )
    accepted = 0
    for row in cache.rows:
        accepted += tracker.insert_bits(row)
    return accepted
