"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import dataclasses
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from femtosim import analysis as an
from femtosim.checks import cover_times, full_rank_times
from femtosim.cli import PRESET_BETAS, preset
from femtosim.estimator import sweep_beta
from femtosim.geometry import build_grid, place_uniform, protocol_check, slot_transmissions, tdma_colors
from femtosim.gf2 import BitVector, SpanTracker, bv_random, solve_coefficients, span_contains, span_insert
from femtosim.simulator import STREAM_TRIAL, derive_rng, run_chain_trial, run_experiment
from femtosim.workload import ZipfPopularity, popular_set_size_asymptotic, popular_set_size_exact
from tests.oracles import brute_in_span

SEED = 20240611
GAMMA = 1.606695152415


def test_criterion_01_matrix_vs_closed_form(report):
    start = time.perf_counter()
    worst = max(abs(an.absorption_mean_matrix(h) - an.absorption_mean_closed(h)) for h in range(1, 21))
    mismatches = 0
    for h in range(1, 21):
        exact = an.fundamental_matrix_exact(h)
        numeric = an.absorption_model(h).U
        for i in range(h):
            for j in range(h):
                want = Fraction(2 ** (h - j), 2 ** (h - j) - 1) if j >= i else Fraction(0)
                mismatches += exact[i][j] != want
                mismatches += abs(numeric[i, j] - float(want)) > 1e-12
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and mismatches == 0 and elapsed < 1.0
    report(1, ok, f"max |matrix - closed| = {worst:.2e} (tol 1e-9), U mismatches = {mismatches}, {elapsed:.2f}s (< 1s)")
    assert ok


def test_criterion_02_full_rank_monte_carlo(report):
    times = full_rank_times(523, 2000, derive_rng(SEED, 200))
    mean = times.mean()
    ok = abs(mean - 524.607) <= 0.2
    report(2, ok, f"mean vectors to full rank, h=523, 2000 trials = {mean:.4f} (target 524.607 +/- 0.2, closed form {an.absorption_mean_closed(523):.4f})")
    assert ok


def test_criterion_03_cover_all_monte_carlo(report):
    start = time.perf_counter()
    draws = cover_times(523, 10_000, derive_rng(SEED, 201))
    elapsed = time.perf_counter() - start
    mean = draws.mean()
    ok = abs(mean - 3576.3) <= 0.01 * 3576.3 and elapsed < 60
    report(3, ok, f"mean draws to collect all, h=523, 10^4 trials = {mean:.1f} (target 3576.3 +/- 1%, h*H_h = {an.coupon_collector_mean(523):.4f}), {elapsed:.1f}s (< 60s)")
    assert ok


def test_criterion_04_chain_coded(report):
    h, M, trials = 523, 32, 2000
    hops = np.array([run_chain_trial(h, M, "coded", derive_rng(SEED, STREAM_TRIAL, i)) for i in range(trials)])
    target = (h + GAMMA) / M
    mean = hops.mean()
    ok = abs(mean - target) <= 0.05 * target
    report(4, ok, f"chain coded mean resolving hop, h=523, M=32, {trials} trials = {mean:.4f} (target {target:.4f} +/- 5%)")
    assert ok


@pytest.mark.slow
def test_criterion_05_fig3(report):
    start = time.perf_counter()
    base = preset("fig3")
    betas = PRESET_BETAS["fig3"]
    notes = []

    # geometric mode: paired seeds, so the hop tuples line up trial by trial
    rows = sweep_beta(base, betas)
    geo = {(r.beta, r.policy): r.summary for r in rows}
    geo_ok = True
    for beta in betas:
        u = np.array(geo[beta, "uncoded"].hops, float)
        c = np.array(geo[beta, "coded"].hops, float)
        d = u - c
        lower = d.mean() - 1.96 * d.std(ddof=1) / math.sqrt(len(d))
        better = lower > 0
        geo_ok &= better
        notes.append(f"beta={beta}: uncoded {u.mean():.3f}, coded {c.mean():.3f}, paired 95% lower bound {lower:+.3f}")
    mono = True
    for policy in ("uncoded", "coded"):
        means = [geo[b, policy].mean_hops for b in betas]
        mono &= all(a >= b for a, b in zip(means, means[1:]))

    # uncapped chain mode: cover-all resolution, as in the hop-count theorems
    chain = dataclasses.replace(base, chain_mode=True, chain_resolve="all")
    ratios = []
    for beta in betas:
        cfg = dataclasses.replace(chain, beta=beta)
        u = run_experiment(dataclasses.replace(cfg, policy="uncoded")).mean_hops
        c = run_experiment(dataclasses.replace(cfg, policy="coded")).mean_hops
        ratios.append(u / c)
    h = 523
    Hh = an.harmonic_number(h)
    ratio_mono = all(a >= b for a, b in zip(ratios, ratios[1:]))
    ratio_near = abs(ratios[0] / Hh - 1) <= 0.05
    elapsed = time.perf_counter() - start

    ok = geo_ok and mono and ratio_mono and ratio_near and elapsed < 15 * 60
    for line in notes:
        print("    " + line)
    report(
        5,
        ok,
        f"coded < uncoded (95%) at every beta: {geo_ok}; monotone in beta: {mono}; "
        f"chain ratio uncoded/coded by beta {[round(r, 3) for r in ratios]} "
        f"(non-increasing in beta: {ratio_mono}, within 5% of H_h={Hh:.4f} at beta=0.3: {ratio_near}); "
        f"{elapsed:.0f}s (< 900s)",
    )
    assert ok


def test_criterion_06_popular_set_sizing(report):
    config = preset("fig3")
    pop = ZipfPopularity(config.m, config.s)
    exact = popular_set_size_exact(pop, config.eps).h
    asym = popular_set_size_asymptotic(config.n, config.alpha, config.s)
    within = 0.5 <= exact / asym <= 2.0
    ok = within and round(asym) == 523
    report(6, ok, f"exact scan h = {exact}, n^0.8 = {asym:.2f} (rounds to {round(asym)}), ratio {exact / asym:.4f} (needs [0.5, 2])")
    assert ok


def test_criterion_07_capacity_ratio(report):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10):
        n = float(rng.uniform(10, 1e7))
        s = float(rng.uniform(1.1, 4.0))
        alpha = 1 / (2 * (s - 1)) + float(rng.uniform(0.01, 2.0))
        beta = float(rng.uniform(0.0, 1.0))
        ratio = an.zipf_capacity_coded(n, alpha, beta, s) / an.zipf_capacity_uncoded(n, alpha, beta, s)
        worst = max(worst, abs(ratio / math.log(n) - 1))
    ok = worst <= 4 * 2.0 ** -52
    report(7, ok, f"coded/uncoded / ln n - 1 over 10 tuples: max {worst:.1e} (<= 4 ulp)")
    assert ok


def test_criterion_08_gf2_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    disagreements = 0
    for _ in range(1000):
        h = int(rng.integers(1, 9))
        k = int(rng.integers(0, 13))
        vs = [bv_random(h, rng) for _ in range(k)]
        target = bv_random(h, rng)
        t = SpanTracker(h)
        for v in vs:
            span_insert(t, v)
        disagreements += span_contains(t, target) != brute_in_span(vs, target)
    failures = 0
    for _ in range(1000):
        h = int(rng.integers(1, 17))
        k = int(rng.integers(1, 21))
        vs = [bv_random(h, rng) for _ in range(k)]
        target = BitVector(h, 0)
        for v, c in zip(vs, rng.integers(0, 2, size=k)):
            if c:
                target = target ^ v
        coeffs = solve_coefficients(vs, target)
        acc = 0
        for v, c in zip(vs, coeffs or []):
            acc ^= v.bits if c else 0
        failures += coeffs is None or acc != target.bits
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and failures == 0 and elapsed < 10
    report(8, ok, f"span oracle disagreements {disagreements}/1000, solve failures {failures}/1000, {elapsed:.1f}s (< 10s)")
    assert ok


def test_criterion_09_tdma_protocol(report):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    bad = pairs_total = 0
    for _ in range(100):
        placement = place_uniform(2500, rng)
        grid = build_grid(placement, 1.0)
        sched = tdma_colors(grid, 1.0)
        for color in range(sched.n_colors):
            pairs = slot_transmissions(placement, grid, sched, color, rng)
            pairs_total += len(pairs)
            bad += not protocol_check(placement, pairs, 1.0, grid.c1 * grid.tx_range)
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 30
    report(9, ok, f"infeasible slots {bad}/900 over 100 placements ({pairs_total} transmissions), {elapsed:.1f}s (< 30s)")
    assert ok


def test_criterion_10_determinism(report, tmp_path):
    configs = [
        ["--preset", "smoke"],
        ["--preset", "smoke", "--set", "policy=uncoded"],
        ["--preset", "fig3", "--set", "trials=60", "--set", "beta=0.6"],
    ]
    identical = True
    for k, args in enumerate(configs):
        outputs = []
        for jobs in ("1", "2"):
            out = tmp_path / f"run{k}_{jobs}.csv"
            cmd = [sys.executable, "-m", "femtosim", "simulate", *args, "--seed", "7", "--jobs", jobs, "--out", str(out)]
            subprocess.run(cmd, check=True)
            outputs.append(out.read_bytes())
        identical &= outputs[0] == outputs[1]
    report(10, identical, f"serial vs 2-process CSV byte-identical for {len(configs)} configurations: {identical}")
    assert identical
