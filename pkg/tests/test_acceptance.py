"""Acceptance criteria, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict; the lines are printed as
they happen (visible with ``-s``) and again in the pytest terminal summary.
Run this file directly to execute the suite and print the verdicts.
"""

import math
import time

import numpy as np
import pytest

from starsketch.circfn import equivalent, lag_homometric, verify_injectivity
from starsketch.circfn import roc, rotate, shift
from starsketch.experiments import ExperimentConfig, convergence_study, run_cluster_experiment, run_knn_experiment
from starsketch.geometry import TWO_PI, star_discretize, step_function
from starsketch.sketch import (
    PhiSpec,
    gram_matrix,
    hoeffding_samples,
    kernel,
    phi_range_bound,
    sketch,
    sketch_direct,
    sketch_fft,
    sketch_random,
)
from starsketch.synthesis import StarShapeParams, random_spline_profile, synthesize_with_profile

ACCEPTANCE_RESULTS: dict[int, str] = {}


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_01_fft_matches_direct():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for m in (8, 64, 512, 4096):
        for _ in range(50):
            f = rng.uniform(0.0, 1.0, m)
            d = sketch_direct(f).values
            q = sketch_fft(f).values
            worst = max(worst, float(np.max(np.abs(q - d)) / np.max(np.abs(d))))
    elapsed = time.perf_counter() - t0
    verdict(1, worst < 1e-9 and elapsed < 10.0, f"max relative diff {worst:.2e} (< 1e-9), {elapsed:.1f}s (< 10s)")


def test_criterion_02_invariance_suite():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(3, 65))
        f = rng.uniform(0.0, 1.0, m)
        for route in (sketch_direct, sketch_fft):
            base = route(f).values
            variants = [rotate(f, x) for x in range(m)]
            variants += [shift(f, c) for c in rng.uniform(-5.0, 5.0, 10)]
            variants += [roc(f, c) for c in (0.0, *rng.uniform(-5.0, 5.0, 3))]
            for g in variants:
                worst = max(worst, float(np.max(np.abs(route(g.values).values - base))))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-12 and elapsed < 30.0, f"max deviation {worst:.2e} (<= 1e-12), {elapsed:.1f}s (< 30s)")


def test_criterion_03_injectivity_at_desk_scale():
    t0 = time.perf_counter()
    reports = [verify_injectivity(5), verify_injectivity(6)]
    reports += [verify_injectivity(m, "random_general_position", trials=10_000, seed=m) for m in (6, 8, 12)]
    f, g = [1, 3, 5, 4, 2], [3, 1, 4, 2, 5]
    pair_flagged = not lag_homometric(f, g) and not equivalent(f, g)
    pair_flagged &= float(np.linalg.norm(sketch(f).values - sketch(g).values)) >= 1e-9
    elapsed = time.perf_counter() - t0
    bad = [r.to_dict() for r in reports if not r.ok]
    counts = ", ".join(f"m={r.m}/{r.family[:4]}:{r.pairs}" for r in reports)
    ok = not bad and pair_flagged and elapsed < 300.0
    verdict(3, ok, f"{counts}; counterexamples {len(bad)}; example pair non-equivalent={pair_flagged}; {elapsed:.1f}s")


def test_criterion_04_discretization_bound():
    theta = np.linspace(0.0, TWO_PI, 20_000, endpoint=False) + 1e-7
    slack = math.inf
    for seed in range(20):
        shape, profile = synthesize_with_profile(StarShapeParams(), seed)
        r = profile(theta)
        for m in (32, 128, 512):
            dev = float(np.max(np.abs(step_function(star_discretize(shape, m), theta) - r)))
            slack = min(slack, math.pi * profile.lipschitz / m - dev)
    verdict(4, slack >= 0.0, f"min(pi*eta/m - deviation) = {slack:.3e} (>= 0)")


def test_criterion_05_stability_bound():
    rng = np.random.default_rng(5)
    slack = math.inf
    for i in range(100):
        eps = (1e-3, 1e-2)[i % 2]
        m = int(rng.integers(4, 257))
        f = rng.uniform(0.05, 1.0, m)
        g = np.clip(f + rng.uniform(-eps, eps, m), 1e-9, 1.0)
        assert np.max(np.abs(f - g)) <= eps
        dev = float(np.max(np.abs(sketch(f).values - sketch(g).values)))
        slack = min(slack, 2 * math.e * eps - dev)
    verdict(5, slack >= 0.0, f"min(2e*eps - deviation) = {slack:.3e} (>= 0)")


def test_criterion_06_kernel_psd():
    low = math.inf
    for seed in range(20):
        rng = np.random.default_rng(600 + seed)
        funcs = rng.uniform(0.0, 1.0, (20, 32))
        low = min(low, float(np.linalg.eigvalsh(gram_matrix(funcs)).min()))
    verdict(6, low >= -1e-9, f"min eigenvalue {low:.3e} (>= -1e-9)")


def test_criterion_07_hoeffding():
    d = hoeffding_samples(0.1, 0.01, 1.0)
    rng = np.random.default_rng(7)
    m, hits, widest = 512, 0, 0.0
    for trial in range(1000):
        # normalized inputs: every term V_f(k) V_g(k) lies in [1, B] with B - 1 <= 1
        f = rng.uniform(0.0, 0.3, m)
        g = rng.uniform(0.0, 0.3, m)
        widest = max(widest, phi_range_bound(f, g) - 1.0)
        zf = sketch_random(f, PhiSpec(), d, seed=trial)
        zg = sketch_random(g, PhiSpec(), d, seed=trial)
        hits += abs(zf.dot(zg) - kernel(f, g)) <= 0.1
    ok = d == 265 and hits >= 990 and widest <= 1.0
    verdict(7, ok, f"D={d} (== 265); coverage {hits}/1000 (>= 990); term range width <= {widest:.3f}")


@pytest.mark.slow
def test_criterion_08_clustering():
    t0 = time.perf_counter()
    ms = [16, 64, 256, 1024]
    snap = run_cluster_experiment(ExperimentConfig(m_values=ms, snap_rotations=True, seed=8))
    cont = run_cluster_experiment(ExperimentConfig(m_values=ms, seed=8))
    elapsed = time.perf_counter() - t0
    snap_ok = all(r.accuracy == 1.0 for r in snap.rows)
    means = [cont.means()[m] for m in ms]
    inversions = sum(b < a for a, b in zip(means, means[1:]))
    ok = snap_ok and inversions <= 1 and means[-1] >= 0.95 and elapsed < 180.0
    shown = ", ".join(f"{m}:{a:.3f}" for m, a in zip(ms, means))
    verdict(8, ok, f"snap all 1.00={snap_ok}; continuous means {shown}; inversions {inversions}; {elapsed:.1f}s")


def test_criterion_09_knn_retrieval():
    t0 = time.perf_counter()
    rows = run_knn_experiment(ExperimentConfig(mode="knn_demo", m_values=[128], n_shapes=100, trials=1, seed=9))
    elapsed = time.perf_counter() - t0
    firsts = sum(r.rank == 1 for r in rows)
    ok = len(rows) == 100 and firsts >= 95 and elapsed < 60.0
    verdict(9, ok, f"original at rank 1 in {firsts}/{len(rows)} (>= 95), {elapsed:.1f}s")


def test_criterion_10_convergence_order():
    res = convergence_study(random_spline_profile(seed=10), [32, 64, 128, 256, 512, 1024, 2048])
    verdict(10, res.order >= 1.8, f"fitted order {res.order:.2f} (>= 1.8) for a C2 spline profile")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
