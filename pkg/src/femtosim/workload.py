"""Zipf content popularity, popular-set sizing and request sampling.

Content indices are 1-based throughout: content ``1`` is the most popular.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy.special import zeta

__all__ = [
    "ValidityWarning",
    "ZipfPopularity",
    "PopularSet",
    "TailBound",
    "zipf_pmf",
    "zipf_sample",
    "popular_set_size_exact",
    "popular_set_size_asymptotic",
    "tail_bound",
    "asymptotic_validity",
]


class ValidityWarning(UserWarning):
    """Parameters fall outside the regime where an asymptotic formula holds."""


class ZipfPopularity:
    """Truncated Zipf law ``P[r = i] = i**-s / H_{m,s}`` over ``1..m``.

    The full pmf, cdf and tail arrays are precomputed once (8 bytes per
    content each), so sampling is an exact inverse-cdf lookup.

    Parameters
    ----------
    m : int
        Number of contents.
    s : float
        Zipf exponent, ``s >= 0``.
    """

    def __init__(self, m: int, s: float):
        if m < 1:
            raise ValueError(f"need at least one content, got m={m}")
        if s < 0:
            raise ValueError(f"Zipf exponent must be >= 0, got s={s}")
        self.m = int(m)
        self.s = float(s)
        weights = np.arange(1, self.m + 1, dtype=float) ** -self.s
        self.harmonic = math.fsum(weights)
        pmf = weights / self.harmonic
        # tails[k] = P[r > k], summed from the small end for accuracy
        tails = np.zeros(self.m + 1)
        tails[:-1] = np.cumsum(pmf[::-1])[::-1]
        tails[0] = 1.0
        self._pmf = pmf
        self._tails = tails
        self._cdf = np.cumsum(pmf)
        self._cdf[-1] = 1.0
        for a in (self._pmf, self._tails, self._cdf):
            a.setflags(write=False)

    @property
    def pmf_array(self) -> np.ndarray:
        return self._pmf

    def pmf(self, i: int) -> float:
        if not 1 <= i <= self.m:
            raise IndexError(f"content index {i} outside 1..{self.m}")
        return float(self._pmf[i - 1])

    def tail(self, h: int) -> float:
        """``P[r > h]``."""
        if not 0 <= h <= self.m:
            raise IndexError(f"head size {h} outside 0..{self.m}")
        return float(self._tails[h])

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right") + 1
        idx = np.minimum(idx, self.m)
        return int(idx) if size is None else idx

    def __repr__(self) -> str:
        return f"ZipfPopularity(m={self.m}, s={self.s})"


def zipf_pmf(pop: ZipfPopularity, i: int) -> float:
    return pop.pmf(i)


def zipf_sample(pop: ZipfPopularity, rng: np.random.Generator) -> int:
    return pop.sample(rng)


class PopularSet(NamedTuple):
    h: int
    epsilon: float


def popular_set_size_exact(pop: ZipfPopularity, eps: float) -> PopularSet:
    """Smallest ``h`` whose tail mass ``P[r > h]`` is at most ``eps``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    # tails is non-increasing; first index k>=1 with tails[k] <= eps
    below = np.flatnonzero(pop._tails[1:] <= eps)
    h = int(below[0]) + 1 if len(below) else pop.m
    return PopularSet(h, eps)


def asymptotic_validity(alpha: float, s: float) -> bool:
    """True when ``s > 1`` and ``alpha > 1 / (2 (s - 1))``."""
    return s > 1 and alpha > 1.0 / (2.0 * (s - 1.0))


def popular_set_size_asymptotic(n: float, alpha: float, s: float) -> float:
    """Unit-constant popular-set size ``n ** ((alpha + 1/2) / s)``.

    Emits :class:`ValidityWarning` outside ``s > 1, alpha > 1/(2(s-1))``.
    """
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    if not asymptotic_validity(alpha, s):
        warnings.warn(
            f"popular-set scaling needs s > 1 and alpha > 1/(2(s-1)); got alpha={alpha}, s={s}",
            ValidityWarning,
            stacklevel=2,
        )
    return float(n) ** ((alpha + 0.5) / s)


class TailBound(NamedTuple):
    bound: float
    exact: float
    # (m - h) / H_{m,s} <= 2 m / zeta(s) is what the bound leans on
    premise_holds: bool


def tail_bound(pop: ZipfPopularity, h: int) -> TailBound:
    """Upper bound ``2 m h**-s / zeta(s)`` on ``P[r > h]`` next to the exact tail."""
    if pop.s <= 1:
        raise ValueError("the zeta bound needs s > 1")
    z = float(zeta(pop.s))
    bound = 2.0 * pop.m * h ** -pop.s / z
    premise = (pop.m - h) / pop.harmonic <= 2.0 * pop.m / z
    return TailBound(bound, pop.tail(h), premise)
