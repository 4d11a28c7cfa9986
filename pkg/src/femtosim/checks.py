"""Oracle cross-checks behind ``femtosim validate``.

Each check pairs a quantity computed by the library with an independent route
to the same number and a fixed tolerance.  Monte-Carlo checks use ``4`` standard
errors, so a correct implementation fails with probability well below 1e-3
per check, and the seeded streams make the outcome fixed for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List

import numpy as np

from . import analysis
from .gf2 import SpanTracker, random_bits
from .simulator import derive_rng, run_chain_trial

MC_SIGMAS = 4.0


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.value - self.expected) <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name}: got {self.value:.10g}, expected {self.expected:.10g} "
            f"+/- {self.tolerance:.3g}"
        )


def _mc(name, samples, expected) -> Check:
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / math.sqrt(len(samples))
    return Check(name, float(samples.mean()), expected, MC_SIGMAS * se)


def full_rank_times(h: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Number of density-1/2 vectors drawn until ``F_2^h`` is spanned, per trial."""
    out = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        tracker = SpanTracker(h)
        while not tracker.is_full_rank:
            for bits in random_bits(h, rng, h + 8 - tracker.rank):
                if tracker.insert_bits(bits) and tracker.is_full_rank:
                    break
        out[t] = tracker.inserted_count
    return out


def cover_times(h: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Number of uniform draws from ``h`` items until every item is seen, per trial."""
    block = max(64, int(1.5 * analysis.coupon_collector_mean(h)))
    out = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        seen = np.zeros(h, dtype=bool)
        count = offset = 0
        while True:
            values, first = np.unique(rng.integers(h, size=block), return_index=True)
            new = ~seen[values]
            if count + np.count_nonzero(new) == h:
                out[t] = offset + int(first[new].max()) + 1
                break
            seen[values] = True
            count += int(np.count_nonzero(new))
            offset += block
    return out


def run_checks(seed: int = 0, scale: float = 1.0) -> List[Check]:
    """Run the cross-check suite; ``scale`` multiplies the Monte-Carlo trial counts."""
    trials = max(50, int(round(1000 * scale)))
    checks = []

    worst = max(
        abs(analysis.absorption_mean_matrix(h) - analysis.absorption_mean_closed(h))
        for h in range(1, 21)
    )
    checks.append(Check("absorption matrix vs closed form, h=1..20", worst, 0.0, 1e-9))

    mismatches = 0
    for h in (1, 2, 5, 12):
        U = analysis.fundamental_matrix_exact(h)
        for i in range(h):
            for j in range(h):
                want = Fraction(2 ** (h - j), 2 ** (h - j) - 1) if j >= i else Fraction(0)
                mismatches += U[i][j] != want
    checks.append(Check("fundamental matrix entries (exact)", mismatches, 0, 0))

    rng = derive_rng(seed, 100)
    checks.append(
        _mc(
            "vectors to full rank, h=24",
            full_rank_times(24, trials, rng),
            analysis.absorption_mean_closed(24),
        )
    )
    rng = derive_rng(seed, 101)
    checks.append(
        _mc("draws to collect all, h=40", cover_times(40, trials, rng), analysis.coupon_collector_mean(40))
    )
    rng = derive_rng(seed, 102)
    checks.append(
        _mc(
            "chain coded hops (all), h=64 M=8",
            [run_chain_trial(64, 8, "coded", rng) for _ in range(trials)],
            # hop index k resolves iff rank is full after (k+1)M vectors
            _chain_full_rank_hops(64, 8),
        )
    )
    rng = derive_rng(seed, 103)
    checks.append(
        _mc(
            "chain uncoded hops (all), h=64 M=8",
            [run_chain_trial(64, 8, "uncoded", rng) for _ in range(trials)],
            analysis.batched_coupon_collector_mean(64, 8) - 1,
        )
    )
    rng = derive_rng(seed, 104)
    checks.append(
        _mc(
            "chain coded hops (request), h=64 M=8",
            [run_chain_trial(64, 8, "coded", rng, resolve="request") for _ in range(trials)],
            analysis.coded_single_target_hops(64, 8),
        )
    )
    rng = derive_rng(seed, 105)
    checks.append(
        _mc(
            "chain uncoded hops (request), h=64 M=8",
            [run_chain_trial(64, 8, "uncoded", rng, resolve="request") for _ in range(trials)],
            analysis.uncoded_single_target_hops(64, 8),
        )
    )
    return checks


def _chain_full_rank_hops(h: int, M: int) -> float:
    # E[hop] = sum_k P[rank < h after (k+1) M vectors]
    total = 0.0
    k = 1
    while True:
        p_full = float(analysis.rank_distribution(h, k * M)[h])
        if 1.0 - p_full < 1e-15:
            return total
        total += 1.0 - p_full
        k += 1
