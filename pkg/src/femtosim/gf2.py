"""Bit-packed GF(2) vectors and an incrementally row-reduced span tracker.

Vectors are packed into a single Python ``int``: column ``j`` of the vector is
bit ``j`` of the integer.  Pivots are always the lowest set column of a
reduced vector, so the basis and its pivot columns are fully determined by the
insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

__all__ = [
    "BitVector",
    "SpanTracker",
    "bv_random",
    "random_bits",
    "span_insert",
    "span_contains",
    "solve_coefficients",
]


def _check_dimension(h) -> int:
    if isinstance(h, bool) or not isinstance(h, (int, np.integer)):
        raise TypeError(f"dimension must be an integer, got {type(h).__name__}")
    if h < 1:
        raise ValueError(f"dimension must be >= 1, got {h}")
    return int(h)


@dataclass(frozen=True)
class BitVector:
    """A vector in F_2^length stored as a packed integer."""

    length: int
    bits: int = 0

    def __post_init__(self):
        _check_dimension(self.length)
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError("bits set beyond the vector length")

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BitVector":
        """Build from a 0/1 sequence; ``values[0]`` is column 0."""
        bits = 0
        for j, b in enumerate(values):
            if b not in (0, 1, True, False):
                raise ValueError(f"entry {j} is not a bit: {b!r}")
            if b:
                bits |= 1 << j
        return cls(len(values), bits)

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        """Build from a string such as ``"101"``; the first character is column 0."""
        return cls.from_list([int(c) for c in text])

    @classmethod
    def unit(cls, length: int, column: int) -> "BitVector":
        if not 0 <= column < length:
            raise IndexError(f"column {column} out of range for length {length}")
        return cls(length, 1 << column)

    def __getitem__(self, column: int) -> int:
        if not 0 <= column < self.length:
            raise IndexError(column)
        return (self.bits >> column) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, self.bits ^ other.bits)

    def __len__(self) -> int:
        return self.length

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def is_zero(self) -> bool:
        return self.bits == 0

    def to_list(self) -> List[int]:
        return [(self.bits >> j) & 1 for j in range(self.length)]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_list())


def random_bits(h: int, rng: np.random.Generator, count: int = 1) -> List[int]:
    """Draw ``count`` packed density-1/2 vectors of dimension ``h`` as raw ints.

    One call to ``rng.bytes`` is made for the whole batch, so the result for a
    given stream state does not depend on how callers consume the integers.
    """
    nbytes = (h + 7) // 8
    mask = (1 << h) - 1
    raw = rng.bytes(nbytes * count)
    return [
        int.from_bytes(raw[k * nbytes:(k + 1) * nbytes], "little") & mask
        for k in range(count)
    ]


def bv_random(h: int, rng: np.random.Generator) -> BitVector:
    """Draw a vector whose bits are independent fair coin flips.

    The all-zero vector is a legitimate outcome (probability ``2**-h``).
    """
    h = _check_dimension(h)
    return BitVector(h, random_bits(h, rng)[0])


class SpanTracker:
    """Incremental Gaussian elimination over GF(2).

    The basis is kept in fully reduced form: each row has a 1 at its own pivot
    column and 0 at every other row's pivot column.  With
    ``track_coefficients=True`` every basis row also carries the set of
    inserted vectors (as a bitmask over insertion indices) that XOR to it,
    which is what :func:`solve_coefficients` reads back.

    Parameters
    ----------
    dimension : int
        Length of the vectors the tracker accepts.
    track_coefficients : bool, default=False
        Record companion coefficient rows during elimination.
    """

    def __init__(self, dimension: int, track_coefficients: bool = False):
        self.dimension = _check_dimension(dimension)
        self.track_coefficients = track_coefficients
        self.inserted_count = 0
        self._rows: List[int] = []
        self._combos: List[int] = []
        self._pivbits: List[int] = []
        self.pivot_map: dict = {}

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def is_full_rank(self) -> bool:
        return len(self._rows) == self.dimension

    @property
    def basis(self) -> List[BitVector]:
        return [BitVector(self.dimension, r) for r in self._rows]

    def _check(self, v: BitVector) -> int:
        if v.length != self.dimension:
            raise ValueError(
                f"vector length {v.length} does not match tracker dimension {self.dimension}"
            )
        return v.bits

    def _reduce(self, bits: int) -> tuple:
        # rows share no pivot bits, so each row is tested once, in any order
        combo = 0
        if self.track_coefficients:
            for pb, row, c in zip(self._pivbits, self._rows, self._combos):
                if bits & pb:
                    bits ^= row
                    combo ^= c
        else:
            for pb, row in zip(self._pivbits, self._rows):
                if bits & pb:
                    bits ^= row
        return bits, combo

    def insert_bits(self, bits: int) -> bool:
        """Insert a raw packed vector; see :meth:`insert`."""
        index = self.inserted_count
        self.inserted_count += 1
        if len(self._rows) == self.dimension or not bits:
            return False
        if bits >> self.dimension:
            raise ValueError("bits set beyond the tracker dimension")
        reduced, combo = self._reduce(bits)
        if not reduced:
            return False
        combo ^= 1 << index
        low = reduced & -reduced
        if self.track_coefficients:
            for i, row in enumerate(self._rows):
                if row & low:
                    self._rows[i] = row ^ reduced
                    self._combos[i] ^= combo
        else:
            self._rows = [r ^ reduced if r & low else r for r in self._rows]
        self.pivot_map[low.bit_length() - 1] = len(self._rows)
        self._rows.append(reduced)
        self._combos.append(combo)
        self._pivbits.append(low)
        return True

    def insert(self, v: BitVector) -> bool:
        """Offer ``v`` to the span; return True iff the rank grew."""
        return self.insert_bits(self._check(v))

    def contains_bits(self, bits: int) -> bool:
        if len(self._rows) == self.dimension:
            return True
        return self._reduce(bits)[0] == 0

    def contains(self, target: BitVector) -> bool:
        """Return True iff ``target`` lies in the span of the inserted vectors."""
        return self.contains_bits(self._check(target))

    def contains_unit(self, column: int) -> bool:
        """Fast membership test for the unit vector ``e_column``."""
        if len(self._rows) == self.dimension:
            return True
        i = self.pivot_map.get(column)
        return i is not None and self._rows[i] == 1 << column

    def express(self, target: BitVector) -> Optional[int]:
        """Bitmask over insertion indices whose XOR is ``target``, or None."""
        if not self.track_coefficients:
            raise RuntimeError("tracker was built without coefficient tracking")
        reduced, combo = self._reduce(self._check(target))
        return None if reduced else combo

    def __repr__(self) -> str:
        return (
            f"SpanTracker(dimension={self.dimension}, rank={self.rank}, "
            f"inserted_count={self.inserted_count})"
        )


def span_insert(tracker: SpanTracker, v: BitVector) -> bool:
    return tracker.insert(v)


def span_contains(tracker: SpanTracker, target: BitVector) -> bool:
    return tracker.contains(target)


def solve_coefficients(
    vectors: Iterable[BitVector], target: BitVector
) -> Optional[List[int]]:
    """Find ``c`` with ``XOR(v_i for c_i == 1) == target``.

    Returns the coefficient list, or ``None`` when ``target`` is outside the
    span of ``vectors`` (the request then has to come from the helper).
    """
    vectors = list(vectors)
    tracker = SpanTracker(target.length, track_coefficients=True)
    for v in vectors:
        tracker.insert(v)
    combo = tracker.express(target)
    if combo is None:
        return None
    coeffs = [(combo >> i) & 1 for i in range(len(vectors))]
    check = 0
    for c, v in zip(coeffs, vectors):
        if c:
            check ^= v.bits
    if check != target.bits:  # pragma: no cover - guards the elimination bookkeeping
        raise AssertionError("coefficient solution failed self-verification")
    return coeffs
