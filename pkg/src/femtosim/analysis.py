"""Closed-form hop counts, absorption times and capacity expressions.

All Theta-type scaling laws are instantiated with unit constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from .geometry import reuse_spacing
from .workload import ValidityWarning, asymptotic_validity

__all__ = [
    "TrivialRegimeWarning",
    "AbsorptionModel",
    "TheoryPoint",
    "harmonic_number",
    "coupon_collector_mean",
    "batched_coupon_collector_mean",
    "absorption_mean_closed",
    "absorption_mean_matrix",
    "absorption_model",
    "fundamental_matrix_exact",
    "erdos_borwein",
    "rank_distribution",
    "span_membership_probability",
    "coded_single_target_hops",
    "uncoded_single_target_hops",
    "ex_uncoded_theory",
    "ex_coded_theory",
    "capacity",
    "ex_total",
    "zipf_capacity_uncoded",
    "zipf_capacity_coded",
    "theory_point",
]

MATRIX_MAX_H = 30


class TrivialRegimeWarning(UserWarning):
    """Every popular request is served locally; capacity is capped at Theta(1)."""


def harmonic_number(h: int) -> float:
    """``H_h = sum_{i=1}^h 1/i`` with compensated summation."""
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    return math.fsum(1.0 / i for i in range(1, h + 1))


def coupon_collector_mean(h: int) -> float:
    """Expected uniform draws (with replacement) until all ``h`` items are seen."""
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    return h * harmonic_number(h)


def batched_coupon_collector_mean(h: int, M: int) -> float:
    """Expected number of caches, each holding ``min(M, h)`` distinct uniform
    items, until their union covers all ``h`` items.

    Exact, by first-step analysis on the number of covered items with
    hypergeometric transitions.
    """
    if h < 1 or M < 1:
        raise ValueError("h and M must be >= 1")
    M = min(M, h)
    log_total = math.lgamma(h + 1) - math.lgamma(M + 1) - math.lgamma(h - M + 1)

    def log_comb(a, b):
        return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)

    # E[c] = expected further caches from c covered items; E[h] = 0
    expect = [0.0] * (h + 1)
    for c in range(h - 1, -1, -1):
        # picking j new items: C(h-c, j) C(c, M-j) / C(h, M)
        stay = 0.0
        acc = 1.0
        for j in range(max(0, M - c), min(M, h - c) + 1):
            p = math.exp(log_comb(h - c, j) + log_comb(c, M - j) - log_total)
            if j == 0:
                stay = p
            else:
                acc += p * expect[c + j]
        expect[c] = acc / (1.0 - stay)
    return expect[0]


def absorption_mean_closed(h: int) -> float:
    """Expected number of density-1/2 vectors needed to span ``F_2^h``.

    ``sum_{i=1}^h 2^i / (2^i - 1) = h + sum_{i=1}^h 1 / (2^i - 1)``.
    """
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    # terms beyond i ~ 60 vanish in double precision
    tail = math.fsum(1.0 / (2.0 ** i - 1.0) for i in range(1, min(h, 128) + 1))
    return h + tail


@dataclass(frozen=True)
class AbsorptionModel:
    """Phase-type description of the rank chain.

    State ``i`` (0-indexed) is the current rank; ``T`` holds transitions among
    transient states, ``T0`` the one-step absorption probabilities and ``U``
    the fundamental matrix ``(I - T)^-1``.
    """

    h: int
    T: np.ndarray
    T0: np.ndarray
    U: np.ndarray

    @property
    def mean_absorption_time(self) -> float:
        return float(self.U[0].sum())


def _transient_matrix(h: int) -> np.ndarray:
    T = np.zeros((h, h))
    for i in range(h):
        stay = 2.0 ** i / 2.0 ** h
        T[i, i] = stay
        if i + 1 < h:
            T[i, i + 1] = 1.0 - stay
    return T


def _check_matrix_h(h: int) -> None:
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if h > MATRIX_MAX_H:
        raise ValueError(
            f"matrix form is limited to h <= {MATRIX_MAX_H}; "
            "use absorption_mean_closed for larger h"
        )


def absorption_model(h: int) -> AbsorptionModel:
    """Build ``T``, ``T0`` and ``U`` numerically for ``1 <= h <= 30``."""
    _check_matrix_h(h)
    T = _transient_matrix(h)
    A = np.eye(h) - T
    T0 = A @ np.ones(h)
    # I - T is upper bidiagonal: back-substitute column by column
    U = np.zeros((h, h))
    for col in range(h):
        for i in range(col, -1, -1):
            rhs = 1.0 if i == col else 0.0
            if i + 1 <= col:
                rhs -= A[i, i + 1] * U[i + 1, col]
            U[i, col] = rhs / A[i, i]
    return AbsorptionModel(h, T, T0, U)


def absorption_mean_matrix(h: int) -> float:
    """First-row sum of ``(I - T)^-1``, i.e. ``[1 0 ... 0] U e``.

    Solves ``(I - T) x = e`` by back-substitution on the bidiagonal system.
    """
    _check_matrix_h(h)
    T = _transient_matrix(h)
    x = 0.0
    for i in range(h - 1, -1, -1):
        up = T[i, i + 1] * x if i + 1 < h else 0.0
        x = (1.0 + up) / (1.0 - T[i, i])
    return x


def fundamental_matrix_exact(h: int) -> List[List[Fraction]]:
    """``(I - T)^-1`` in exact rational arithmetic."""
    _check_matrix_h(h)
    full = Fraction(2) ** h
    stay = [Fraction(2) ** i / full for i in range(h)]
    U = [[Fraction(0)] * h for _ in range(h)]
    for col in range(h):
        for i in range(col, -1, -1):
            rhs = Fraction(1 if i == col else 0)
            if i + 1 <= col:
                rhs += (1 - stay[i]) * U[i + 1][col]
            U[i][col] = rhs / (1 - stay[i])
    return U


def erdos_borwein(tol: float = 1e-15) -> float:
    """``sum_{i>=1} 1/(2^i - 1)``, stopping at the first term below ``tol``."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    terms = []
    i = 1
    while True:
        term = 1.0 / (2.0 ** i - 1.0)
        if term < tol:
            break
        terms.append(term)
        i += 1
    return math.fsum(terms)


def _membership_fraction(h: int) -> np.ndarray:
    # (2^d - 1) / (2^h - 1) for d = 0..h, without overflow for large h
    d = np.arange(h + 1)
    ln2 = math.log(2.0)
    return np.ldexp(1.0, d - h) * -np.expm1(-d * ln2) / -math.expm1(-h * ln2)


def rank_distribution(h: int, k: int) -> np.ndarray:
    """``P[rank = d]``, ``d = 0..h``, after ``k`` density-1/2 vectors in ``F_2^h``."""
    dist = np.zeros(h + 1)
    dist[0] = 1.0
    stay = np.ldexp(1.0, np.arange(h + 1) - h)
    for _ in range(k):
        nxt = dist * stay
        nxt[1:] += dist[:-1] * (1.0 - stay[:-1])
        dist = nxt
    return dist


def span_membership_probability(h: int, k: int) -> float:
    """Probability that ``k`` random vectors in ``F_2^h`` span a fixed nonzero target.

    A uniformly random subspace of dimension ``d`` contains a fixed nonzero
    vector with probability ``(2^d - 1) / (2^h - 1)``.
    """
    if h < 1 or k < 0:
        raise ValueError("need h >= 1 and k >= 0")
    return float(np.dot(rank_distribution(h, k), _membership_fraction(h)))


def coded_single_target_hops(h: int, M: int, max_hops: int = 100_000) -> float:
    """Expected hop index at which a chain of coded caches (``M`` rows each,
    hop 0 being the requester) first spans one fixed unit vector."""
    if h < 1 or M < 1:
        raise ValueError("h and M must be >= 1")
    dist = np.zeros(h + 1)
    dist[0] = 1.0
    stay = np.ldexp(1.0, np.arange(h + 1) - h)
    frac = _membership_fraction(h)
    total = 0.0
    for hop in range(max_hops):
        for _ in range(M):
            nxt = dist * stay
            nxt[1:] += dist[:-1] * (1.0 - stay[:-1])
            dist = nxt
        unresolved = 1.0 - float(np.dot(dist, frac))
        if unresolved < 1e-16:
            break
        total += unresolved
    return total


def uncoded_single_target_hops(h: int, M: int) -> float:
    """Expected hop index of the first uncoded cache holding one fixed content."""
    if h < 1 or M < 1:
        raise ValueError("h and M must be >= 1")
    p = min(M, h) / h
    return (1.0 - p) / p


def ex_uncoded_theory(h: int, M: int) -> float:
    """Unit-constant uncoded hop count ``h H_h / M``."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return coupon_collector_mean(h) / M


def ex_coded_theory(h: int, M: int) -> float:
    """Unit-constant coded hop count ``(h + gamma_h) / M``."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return absorption_mean_closed(h) / M


def capacity(ex: float, n: int, W: float = 1.0, c1: float = 1.0, c2: float = 1.0) -> float:
    """Per-node throughput ``W / (n E[x] (c2 c1 s(n))^2) = W / (E[x] c2^2 c1^2 ln n)``.

    ``ex == 0`` means every request is served from the requester's own cache;
    the per-node rate is then capped at ``W`` and a
    :class:`TrivialRegimeWarning` is emitted.
    """
    if n < 2:
        raise ValueError(f"capacity needs n >= 2, got {n}")
    if ex < 0:
        raise ValueError(f"expected hops must be >= 0, got {ex}")
    if ex == 0:
        warnings.warn("zero expected hops: trivial Theta(1) regime", TrivialRegimeWarning, stacklevel=2)
        return float(W)
    return W / (ex * c2 * c2 * c1 * c1 * math.log(n))


def ex_total(eps: float, n: int, ex_popular: float) -> float:
    """Mix of helper-served tail requests and cache-served popular requests."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return eps * math.sqrt(n / math.log(n)) + (1.0 - eps) * ex_popular


def _zipf_capacity_base(n, alpha, beta, s) -> float:
    if not asymptotic_validity(alpha, s):
        warnings.warn(
            f"capacity scaling needs s > 1 and alpha > 1/(2(s-1)); got alpha={alpha}, s={s}",
            ValidityWarning,
            stacklevel=3,
        )
    return float(n) ** (beta - (alpha + 0.5) / s) / math.log(n)


def zipf_capacity_coded(n: float, alpha: float, beta: float, s: float) -> float:
    """``n^(beta - (alpha + 1/2)/s) / ln n``."""
    return _zipf_capacity_base(n, alpha, beta, s)


def zipf_capacity_uncoded(n: float, alpha: float, beta: float, s: float) -> float:
    """``n^(beta - (alpha + 1/2)/s) / (ln n)^2``."""
    return _zipf_capacity_base(n, alpha, beta, s) / math.log(n)


@dataclass(frozen=True)
class TheoryPoint:
    h: int
    M: int
    n: int
    epsilon: float
    ex_uncoded: float
    ex_coded: float
    lambda_uncoded: float
    lambda_coded: float
    W: float
    c1: float
    c2: int


def theory_point(
    h: int,
    M: int,
    n: int,
    epsilon: float = None,
    W: float = 1.0,
    c1: float = 1.0,
    delta: float = 1.0,
) -> TheoryPoint:
    if epsilon is None:
        epsilon = 1.0 / math.sqrt(n)
    c2 = reuse_spacing(c1, delta)
    ex_u = ex_uncoded_theory(h, M)
    ex_c = ex_coded_theory(h, M)
    return TheoryPoint(
        h=h,
        M=M,
        n=n,
        epsilon=epsilon,
        ex_uncoded=ex_u,
        ex_coded=ex_c,
        lambda_uncoded=capacity(ex_u, n, W, c1, c2),
        lambda_coded=capacity(ex_c, n, W, c1, c2),
        W=W,
        c1=c1,
        c2=c2,
    )
