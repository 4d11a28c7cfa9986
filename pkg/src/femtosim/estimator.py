"""Estimator-style front end to the simulator.

:class:`HopSimulator` follows the scikit-learn conventions: constructor
arguments are plain hyper-parameters (so ``get_params``/``set_params``/``clone``
work), ``fit`` builds the random world, and fitted state lives in attributes
with a trailing underscore.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_requests
from .analysis import TheoryPoint, theory_point
from .simulator import (
    STREAM_PREDICT,
    SimConfig,
    SimSummary,
    build_world,
    derive_rng,
    run_experiment,
    serve_request,
)

__all__ = ["HopSimulator", "SweepRow", "sweep_beta", "DEFAULT_BETAS"]

DEFAULT_BETAS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)


class HopSimulator(BaseEstimator):
    """Monte-Carlo hop-count estimator for a femtocache-assisted cell.

    Parameters mirror :class:`~femtosim.simulator.SimConfig`; ``n_jobs`` only
    affects how trials are scheduled, never their outcome.

    Attributes
    ----------
    config_ : SimConfig
        Validated configuration.
    world_ : World
        Node placement, grid and popularity law built by ``fit``.
    h_, M_, m_ : int
        Popular-set size, cache size and catalogue size.
    summary_ : SimSummary
        Set by :meth:`simulate`.
    """

    def __init__(
        self,
        n=2500,
        alpha=1.5,
        beta=0.5,
        s=2.5,
        c1=1.0,
        c3=8.0,
        c4=1.0,
        delta=1.0,
        bandwidth=1.0,
        epsilon=None,
        policy="coded",
        relay_mode="single",
        trials=2000,
        master_seed=0,
        chain_mode=False,
        chain_resolve="all",
        popular_size="exact",
        n_jobs=1,
    ):
        self.n = n
        self.alpha = alpha
        self.beta = beta
        self.s = s
        self.c1 = c1
        self.c3 = c3
        self.c4 = c4
        self.delta = delta
        self.bandwidth = bandwidth
        self.epsilon = epsilon
        self.policy = policy
        self.relay_mode = relay_mode
        self.trials = trials
        self.master_seed = master_seed
        self.chain_mode = chain_mode
        self.chain_resolve = chain_resolve
        self.popular_size = popular_size
        self.n_jobs = n_jobs

    @classmethod
    def from_config(cls, config: SimConfig, n_jobs: int = 1) -> "HopSimulator":
        return cls(**config.to_dict(), n_jobs=n_jobs)

    def fit(self, X=None, y=None):
        """Validate parameters and build the world; ``X`` and ``y`` are ignored."""
        params = self.get_params()
        self.n_jobs_ = check_int(params.pop("n_jobs"), "n_jobs", min_val=1)
        self.config_ = SimConfig(**params)
        self.world_ = build_world(self.config_)
        self.h_ = self.world_.h
        self.M_ = self.config_.M
        self.m_ = self.config_.m
        return self

    def predict(self, X) -> np.ndarray:
        """Hop count for each ``(requester, content)`` row of ``X``.

        Relay choices for row ``i`` come from a stream derived from
        ``master_seed`` and ``i``, so predictions are reproducible.
        """
        check_is_fitted(self, "world_")
        X = check_requests(X, self.config_.n, self.m_)
        out = np.empty(len(X), dtype=np.int64)
        for i, (requester, content) in enumerate(X.tolist()):
            rng = derive_rng(self.config_.master_seed, STREAM_PREDICT, i)
            out[i] = serve_request(self.world_, requester, content, self.config_.policy, rng).hops
        return out

    def simulate(self) -> SimSummary:
        """Run ``trials`` random requests and store the aggregate in ``summary_``."""
        check_is_fitted(self, "world_")
        self.summary_ = run_experiment(self.config_, n_jobs=self.n_jobs_, world=self.world_)
        return self.summary_

    def theory(self) -> TheoryPoint:
        check_is_fitted(self, "world_")
        c = self.config_
        return theory_point(self.h_, self.M_, c.n, c.eps, c.bandwidth, c.c1, c.delta)


@dataclass(frozen=True)
class SweepRow:
    beta: float
    policy: str
    summary: SimSummary
    theory: TheoryPoint


def sweep_beta(
    base,
    betas: Sequence[float] = DEFAULT_BETAS,
    policies: Sequence[str] = ("uncoded", "coded"),
    n_jobs: Optional[int] = None,
) -> List[SweepRow]:
    """Run one experiment per ``(beta, policy)`` pair.

    ``base`` is a :class:`HopSimulator` or a :class:`SimConfig`.  Every run
    keeps the base ``master_seed``, so all rows share the same placement and
    request sequence.
    """
    if not len(betas):
        raise ValueError("beta sweep needs at least one value")
    if isinstance(base, SimConfig):
        base = HopSimulator.from_config(base, n_jobs=n_jobs or 1)
    elif n_jobs is not None:
        base = clone(base).set_params(n_jobs=n_jobs)
    rows = []
    for beta in betas:
        for policy in policies:
            est = clone(base).set_params(beta=float(beta), policy=policy).fit()
            rows.append(SweepRow(float(beta), policy, est.simulate(), est.theory()))
    return rows
