import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from femtosim.caching import (
    CachePolicy,
    CodedCache,
    UncodedCache,
    coded_contribute,
    place_coded,
    place_uncoded,
    uncoded_hit,
)
from femtosim.gf2 import SpanTracker
from femtosim.simulator import STREAM_CACHE, derive_rng
from tests.oracles import naive_rank


def test_policy_values():
    assert CachePolicy("coded") is CachePolicy.CODED
    assert CachePolicy.UNCODED == "uncoded"


class TestUncoded:
    def test_full_cap(self):
        assert place_uncoded(5, 5, np.random.default_rng(0)).contents == {1, 2, 3, 4, 5}
        assert place_uncoded(5, 9, np.random.default_rng(0)).contents == {1, 2, 3, 4, 5}

    def test_marginal_inclusion(self):
        rng = np.random.default_rng(1)
        trials, h, M = 10_000, 523, 10
        counts = np.zeros(h + 1)
        for _ in range(trials):
            cache = place_uncoded(h, M, rng)
            assert len(cache) == M
            counts[list(cache.contents)] += 1
        p = M / h
        sigma = np.sqrt(p * (1 - p) / trials)
        freq = counts[1:] / trials
        # every content within 3 sigma is too strict across 523 tests; check the bulk and the extremes
        assert np.mean(np.abs(freq - p) <= 3 * sigma) > 0.99
        assert np.max(np.abs(freq - p)) <= 5 * sigma

    def test_reproducible(self):
        a = place_uncoded(523, 10, np.random.default_rng(5))
        b = place_uncoded(523, 10, np.random.default_rng(5))
        assert a == b

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 600), st.integers(1, 700), st.integers(0, 2 ** 32))
    def test_size_and_range(self, h, M, seed):
        cache = place_uncoded(h, M, np.random.default_rng(seed))
        assert len(cache) == min(M, h)
        assert all(1 <= r <= h for r in cache.contents)

    def test_hits(self):
        cache = UncodedCache(frozenset({1, 2}))
        assert uncoded_hit(cache, 1)
        assert not uncoded_hit(cache, 3)
        full = place_uncoded(7, 7, np.random.default_rng(0))
        assert all(uncoded_hit(full, r) for r in range(1, 8))
        with pytest.raises(ValueError):
            uncoded_hit(cache, 0)

    @pytest.mark.parametrize("h, M", [(0, 1), (1, 0)])
    def test_bad_sizes(self, h, M):
        with pytest.raises(ValueError):
            place_uncoded(h, M, np.random.default_rng(0))

    def test_independent_node_streams(self):
        # inclusion indicators of two nodes' caches are uncorrelated
        h, M, k = 50, 10, 4000
        a = np.zeros((k, h))
        b = np.zeros((k, h))
        for t in range(k):
            a[t, [r - 1 for r in place_uncoded(h, M, derive_rng(t, STREAM_CACHE, 0)).contents]] = 1
            b[t, [r - 1 for r in place_uncoded(h, M, derive_rng(t, STREAM_CACHE, 1)).contents]] = 1
        r = np.corrcoef(a[:, 0], b[:, 0])[0, 1]
        assert abs(r) <= 3 / np.sqrt(k)


class TestCoded:
    def test_single_bit(self):
        rng = np.random.default_rng(0)
        rows = [place_coded(1, 1, rng).rows for _ in range(4000)]
        assert all(len(r) == 1 for r in rows)
        assert abs(np.mean([r[0] for r in rows]) - 0.5) < 0.03

    def test_participation(self):
        rng = np.random.default_rng(1)
        h, M = 523, 32
        per_content = np.zeros(h)
        for _ in range(1000):
            cache = place_coded(h, M, rng)
            assert cache.M == M
            for row in cache.rows:
                per_content += [(row >> j) & 1 for j in range(h)]
        assert abs(per_content.mean() / 1000 - M / 2) < 0.1

    def test_duplicate_rows_allowed(self):
        rng = np.random.default_rng(2)
        cache = place_coded(1, 50, rng)
        assert len(set(cache.rows)) < cache.M

    def test_contribute_matches_rank(self):
        rng = np.random.default_rng(3)
        cache = place_coded(12, 12, rng)
        t = SpanTracker(12)
        accepted = coded_contribute(cache, t)
        assert accepted == t.rank == naive_rank(cache.vectors(), 12)

    def test_full_rank_accepts_nothing(self):
        rng = np.random.default_rng(4)
        t = SpanTracker(6)
        while not t.is_full_rank:
            coded_contribute(place_coded(6, 3, rng), t)
        assert coded_contribute(place_coded(6, 3, rng), t) == 0

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        cache = place_coded(40, 8, rng)
        t = SpanTracker(40)
        coded_contribute(cache, t)
        assert coded_contribute(cache, t) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            coded_contribute(CodedCache(4, (1, 2)), SpanTracker(5))
