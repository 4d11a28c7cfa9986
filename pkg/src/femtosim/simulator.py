"""Monte-Carlo engine: per-request hop counts under uncoded and coded caching.

Randomness is derived from ``master_seed`` through :class:`numpy.random.SeedSequence`
spawn keys, one stream per purpose and index, so every trial and every cache is
reproducible on its own and results do not depend on execution order.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ._validation import check_choice, check_int, check_real
from .analysis import capacity
from .caching import (
    CachePolicy,
    CodedCache,
    UncodedCache,
    place_coded,
    place_uncoded,
)
from .geometry import (
    Grid,
    Placement,
    RoutePath,
    build_grid,
    place_uniform,
    reuse_spacing,
    route,
)
from .gf2 import SpanTracker, random_bits
from .workload import ZipfPopularity, popular_set_size_exact

__all__ = [
    "RelayMode",
    "ServedBy",
    "SimConfig",
    "World",
    "TrialResult",
    "SimSummary",
    "build_world",
    "serve_request",
    "run_trial",
    "run_chain_trial",
    "run_experiment",
    "derive_rng",
]

# spawn-key prefixes of the independent random streams
STREAM_PLACEMENT = 0
STREAM_TRIAL = 1
STREAM_CACHE = 2
STREAM_PREDICT = 3

CHAIN_HOP_GUARD = 10 ** 6


class RelayMode(str, enum.Enum):
    SINGLE = "single"
    ALL_IN_CELL = "all"


class ServedBy(str, enum.Enum):
    SELF = "self"
    RELAY = "relay"
    HELPER = "helper"


def derive_rng(master_seed: int, stream: int, index: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(stream, index))
    return np.random.default_rng(seq)


def _floor_power(c: float, n: int, exponent: float) -> int:
    # guard against 522.9999999 style rounding of exact powers
    return int(math.floor(c * float(n) ** exponent + 1e-9))


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one experiment.

    ``epsilon=None`` means ``1/sqrt(n)``.  ``popular_size`` picks how the
    popular-set size is obtained: ``"exact"`` scans the Zipf tail for the
    smallest head with mass at least ``1 - epsilon``; ``"asymptotic"`` uses
    ``round(n ** ((alpha + 1/2) / s))``.
    """

    n: int = 2500
    alpha: float = 1.5
    beta: float = 0.5
    s: float = 2.5
    c1: float = 1.0
    c3: float = 8.0
    c4: float = 1.0
    delta: float = 1.0
    bandwidth: float = 1.0
    epsilon: Optional[float] = None
    policy: str = "coded"
    relay_mode: str = "single"
    trials: int = 2000
    master_seed: int = 0
    chain_mode: bool = False
    chain_resolve: str = "all"
    popular_size: str = "exact"

    def __post_init__(self):
        set_ = functools.partial(object.__setattr__, self)
        set_("n", check_int(self.n, "n", min_val=2))
        set_("alpha", check_real(self.alpha, "alpha"))
        set_("beta", check_real(self.beta, "beta"))
        set_("s", check_real(self.s, "s", min_val=0.0))
        set_("c1", check_real(self.c1, "c1", min_val=0.0, include_boundaries="neither"))
        set_("c3", check_real(self.c3, "c3", min_val=0.0, include_boundaries="neither"))
        set_("c4", check_real(self.c4, "c4", min_val=0.0, include_boundaries="neither"))
        set_("delta", check_real(self.delta, "delta", min_val=0.0))
        set_("bandwidth", check_real(self.bandwidth, "bandwidth", min_val=0.0, include_boundaries="neither"))
        if self.epsilon is not None:
            set_("epsilon", check_real(self.epsilon, "epsilon", 0.0, 1.0, include_boundaries="neither"))
        set_("policy", check_choice(self.policy, "policy", {"coded", "uncoded"}))
        set_("relay_mode", check_choice(self.relay_mode, "relay_mode", {"single", "all"}))
        set_("trials", check_int(self.trials, "trials", min_val=1))
        set_("master_seed", check_int(self.master_seed, "master_seed", min_val=0, max_val=2 ** 64 - 1))
        if not isinstance(self.chain_mode, (bool, np.bool_)):
            raise TypeError(f"chain_mode must be a bool, got {self.chain_mode!r}")
        set_("chain_mode", bool(self.chain_mode))
        set_("chain_resolve", check_choice(self.chain_resolve, "chain_resolve", {"all", "request"}))
        set_("popular_size", check_choice(self.popular_size, "popular_size", {"exact", "asymptotic"}))
        if self.m < 1:
            raise ValueError(f"c3 * n**alpha gives no contents (m={self.m})")
        if self.M < 1:
            raise ValueError(f"c4 * n**beta gives an empty cache (M={self.M})")

    @property
    def eps(self) -> float:
        return 1.0 / math.sqrt(self.n) if self.epsilon is None else self.epsilon

    @property
    def m(self) -> int:
        return _floor_power(self.c3, self.n, self.alpha)

    @property
    def M(self) -> int:
        return _floor_power(self.c4, self.n, self.beta)

    @property
    def c2(self) -> int:
        return reuse_spacing(self.c1, self.delta)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@functools.lru_cache(maxsize=8)
def _popularity(m: int, s: float) -> ZipfPopularity:
    return ZipfPopularity(m, s)


def popular_set_size(config: SimConfig, pop: ZipfPopularity) -> int:
    if config.popular_size == "asymptotic":
        h = round(float(config.n) ** ((config.alpha + 0.5) / config.s))
        return int(min(max(h, 1), pop.m))
    return popular_set_size_exact(pop, config.eps).h


@dataclass
class World:
    """Everything a trial needs: nodes, grid, popularity law and cache oracle.

    Caches are not stored; node ``u``'s cache is regenerated on demand from
    its own derived stream, which is equivalent to placing all ``n`` caches up
    front and keeps memory flat for large ``M``.
    """

    config: SimConfig
    placement: Placement
    grid: Grid
    popularity: ZipfPopularity
    h: int
    M: int
    routes: dict = field(default_factory=dict, repr=False)

    @property
    def helper_cell(self):
        return self.grid.helper_cell

    def uncoded_cache(self, node: int) -> UncodedCache:
        rng = derive_rng(self.config.master_seed, STREAM_CACHE, node)
        return place_uncoded(self.h, self.M, rng)

    def coded_cache(self, node: int) -> CodedCache:
        rng = derive_rng(self.config.master_seed, STREAM_CACHE, node)
        return place_coded(self.h, self.M, rng)

    def route_from(self, cell) -> RoutePath:
        path = self.routes.get(cell)
        if path is None:
            path = self.routes[cell] = route(self.grid, cell, self.helper_cell)
        return path

    def node_cell(self, node: int):
        return divmod(int(self.grid.cell_of_node[node]), self.grid.g)


def build_world(config: SimConfig) -> World:
    rng = derive_rng(config.master_seed, STREAM_PLACEMENT)
    placement = place_uniform(config.n, rng)
    grid = build_grid(placement, config.c1)
    pop = _popularity(config.m, config.s)
    h = popular_set_size(config, pop)
    return World(config, placement, grid, pop, h, config.M)


@dataclass(frozen=True)
class TrialResult:
    requested: int
    hops: int
    served_by: ServedBy
    decodable_on_path: bool
    # -1 in chain mode, where there is no geometry
    requester: int = -1


def _helper_hops(path: RoutePath) -> int:
    # a requester in the helper's own cell still needs one transmission
    return max(path.hop_count, 1)


def serve_request(
    world: World,
    requester: int,
    content: int,
    policy: str,
    rng: np.random.Generator,
) -> TrialResult:
    """Walk the route from ``requester`` toward the helper until the request resolves.

    Hop 0 is the requester's own cache; cells ``1 .. hop_count - 1`` contribute
    relay caches; the helper's cell is the last stop and always resolves.
    """
    path = world.route_from(world.node_cell(requester))
    cells = path.cells
    # drawn for both policies so paired runs stay aligned
    picks = rng.random(len(cells))
    helper = TrialResult(content, _helper_hops(path), ServedBy.HELPER, False, requester)
    if content > world.h:
        return helper

    single = world.config.relay_mode == "single"

    def relays(k):
        nodes = world.grid.members[cells[k]]
        if not nodes:
            return ()
        if single:
            return (nodes[int(picks[k] * len(nodes))],)
        return nodes

    if policy == "uncoded":
        if content in world.uncoded_cache(requester).contents:
            return TrialResult(content, 0, ServedBy.SELF, True, requester)
        for k in range(1, len(cells) - 1):
            for node in relays(k):
                if content in world.uncoded_cache(node).contents:
                    return TrialResult(content, k, ServedBy.RELAY, True, requester)
        return helper

    column = content - 1
    tracker = SpanTracker(world.h)

    def absorb(rows) -> bool:
        # membership can only change when the rank grows
        for row in rows:
            if tracker.insert_bits(row) and tracker.contains_unit(column):
                return True
        return False

    if absorb(world.coded_cache(requester).rows):
        return TrialResult(content, 0, ServedBy.SELF, True, requester)
    for k in range(1, len(cells) - 1):
        if any(absorb(world.coded_cache(node).rows) for node in relays(k)):
            return TrialResult(content, k, ServedBy.RELAY, True, requester)
    return helper


def run_trial(world: World, trial_index: int, policy: Optional[str] = None) -> TrialResult:
    """One request: uniform requester, Zipf content, served along its route."""
    config = world.config
    rng = derive_rng(config.master_seed, STREAM_TRIAL, trial_index)
    requester = int(rng.integers(config.n))
    content = world.popularity.sample(rng)
    return serve_request(world, requester, content, policy or config.policy, rng)


def run_chain_trial(
    h: int,
    M: int,
    policy: str,
    rng: np.random.Generator,
    resolve: str = "all",
    target: Optional[int] = None,
    max_hops: int = CHAIN_HOP_GUARD,
) -> int:
    """First hop index at which an unbounded chain of fresh caches resolves.

    Hop ``k`` contributes the ``(k+1)``-th cache; hop 0 is the requester's own.
    With ``resolve="all"`` the chain must cover every popular content
    (uncoded) or reach full rank (coded).  With ``resolve="request"`` it only
    needs one content, ``target`` (drawn uniformly from ``1..h`` if omitted).
    """
    check_int(h, "h", min_val=1)
    check_int(M, "M", min_val=1)
    policy = check_choice(policy, "policy", {"coded", "uncoded"})
    resolve = check_choice(resolve, "resolve", {"all", "request"})
    if resolve == "request" and target is None:
        target = int(rng.integers(1, h + 1))
    if target is not None and not 1 <= target <= h:
        raise ValueError(f"target must lie in 1..{h}, got {target}")

    if policy == "uncoded":
        covered = np.zeros(h, dtype=bool)
        n_covered = 0
        for hop in range(max_hops):
            picks = place_uncoded(h, M, rng).contents
            if resolve == "request":
                if target in picks:
                    return hop
                continue
            idx = np.fromiter(picks, dtype=np.int64, count=len(picks)) - 1
            n_covered += int(np.count_nonzero(~covered[idx]))
            covered[idx] = True
            if n_covered == h:
                return hop
    else:
        tracker = SpanTracker(h)
        for hop in range(max_hops):
            for row in random_bits(h, rng, M):
                tracker.insert_bits(row)
                if tracker.is_full_rank:
                    break
            if tracker.is_full_rank:
                return hop
            if resolve == "request" and tracker.contains_unit(target - 1):
                return hop
    raise RuntimeError(f"chain did not resolve within {max_hops} hops (h={h}, M={M})")


def _chain_trial_result(config: SimConfig, h: int, trial_index: int, policy: str) -> TrialResult:
    rng = derive_rng(config.master_seed, STREAM_TRIAL, trial_index)
    hops = run_chain_trial(h, config.M, policy, rng, resolve=config.chain_resolve)
    served = ServedBy.SELF if hops == 0 else ServedBy.RELAY
    return TrialResult(-1, hops, served, True)


@dataclass(frozen=True)
class SimSummary:
    config: SimConfig
    h: int
    M: int
    mean_hops: float
    ci95: float
    served_by_self: int
    served_by_relay: int
    served_by_helper: int
    lambda_estimate: float
    hops: Tuple[int, ...] = field(repr=False, default=())

    @property
    def trials(self) -> int:
        return len(self.hops)


def summarize(config: SimConfig, h: int, results: Sequence[TrialResult]) -> SimSummary:
    hops = tuple(r.hops for r in results)
    k = len(hops)
    mean = math.fsum(hops) / k
    if k > 1:
        var = math.fsum((x - mean) ** 2 for x in hops) / (k - 1)
        ci = 1.96 * math.sqrt(var / k)
    else:
        ci = 0.0
    counts = {s: 0 for s in ServedBy}
    for r in results:
        counts[r.served_by] += 1
    lam = capacity(mean, config.n, config.bandwidth, config.c1, config.c2)
    return SimSummary(
        config=config,
        h=h,
        M=config.M,
        mean_hops=mean,
        ci95=ci,
        served_by_self=counts[ServedBy.SELF],
        served_by_relay=counts[ServedBy.RELAY],
        served_by_helper=counts[ServedBy.HELPER],
        lambda_estimate=lam,
        hops=hops,
    )


_WORKER_WORLD: Optional[World] = None


def _init_worker(config: SimConfig) -> None:
    global _WORKER_WORLD
    _WORKER_WORLD = build_world(config)


def _run_chunk(indices: Sequence[int]) -> List[TrialResult]:
    return _run_indices(_WORKER_WORLD, indices)


def _run_indices(world: World, indices: Iterable[int]) -> List[TrialResult]:
    config = world.config
    if config.chain_mode:
        return [_chain_trial_result(config, world.h, i, config.policy) for i in indices]
    return [run_trial(world, i) for i in indices]


def run_experiment(config: SimConfig, n_jobs: int = 1, world: Optional[World] = None) -> SimSummary:
    """Run ``config.trials`` independent trials and aggregate them.

    With ``n_jobs > 1`` trials are split into contiguous chunks over worker
    processes; the reduction runs over results in trial order, so the summary
    is identical to a serial run.
    """
    n_jobs = check_int(n_jobs, "n_jobs", min_val=1)
    indices = list(range(config.trials))
    if n_jobs == 1 or config.trials == 1:
        world = world if world is not None and world.config == config else build_world(config)
        return summarize(config, world.h, _run_indices(world, indices))
    chunks = [c.tolist() for c in np.array_split(np.array(indices), n_jobs) if len(c)]
    with ProcessPoolExecutor(n_jobs, initializer=_init_worker, initargs=(config,)) as pool:
        results = [r for part in pool.map(_run_chunk, chunks) for r in part]
    h = popular_set_size(config, _popularity(config.m, config.s))
    return summarize(config, h, results)
