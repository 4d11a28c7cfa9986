"""Hop-count and capacity simulation for femtocache-assisted multihop cells."""

from .analysis import (
    absorption_mean_closed,
    absorption_mean_matrix,
    capacity,
    coupon_collector_mean,
    erdos_borwein,
    ex_coded_theory,
    ex_uncoded_theory,
)
from .caching import CachePolicy, place_coded, place_uncoded
from .estimator import HopSimulator, sweep_beta
from .gf2 import BitVector, SpanTracker, bv_random, solve_coefficients
from .simulator import SimConfig, SimSummary, run_chain_trial, run_experiment
from .workload import ZipfPopularity, popular_set_size_asymptotic, popular_set_size_exact

__version__ = "0.1.0"

__all__ = [
    "BitVector",
    "CachePolicy",
    "HopSimulator",
    "SimConfig",
    "SimSummary",
    "SpanTracker",
    "ZipfPopularity",
    "absorption_mean_closed",
    "absorption_mean_matrix",
    "bv_random",
    "capacity",
    "coupon_collector_mean",
    "erdos_borwein",
    "ex_coded_theory",
    "ex_uncoded_theory",
    "place_coded",
    "place_uncoded",
    "popular_set_size_asymptotic",
    "popular_set_size_exact",
    "run_chain_trial",
    "run_experiment",
    "solve_coefficients",
    "sweep_beta",
]
