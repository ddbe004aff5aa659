"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected by ``conftest.py`` and printed in the terminal summary
so they survive pytest's output capture. The benchmark criteria are marked
``slow``; run them alone with ``pytest -m slow tests/test_acceptance.py``.
"""
import time

import numpy as np
import pytest

from orthopt.harness import RunConfig, run
from orthopt.linalg import COMPLEX, REAL
from orthopt.optimizers import OrthoStepConfig, pogo_step, slpg_step
from orthopt.base import make_base
from orthopt.quartic import landing_poly_from
from orthopt.stiefel import random_stiefel
from orthopt import verify

from conftest import gaussian, report

SEEDS = range(5)
PCA_ETA = 1.4
PROCRUSTES_ETA = {"pogo": 2e-3, "slpg": 1.5e-3, "rgd": 2e-3}
UNITARY_ETA = 6e-3
CHAIN_ETA = 0.01


def _timed(fn):
    start = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - start


def _benchmark(problem, step, seeds, p=None, n=None, max_iters=3000, chain_len=8, field=REAL):
    """Final gaps, worst logged distance and wall time for each seed."""
    out = []
    for seed in seeds:
        cfg = RunConfig(problem, p, n, chain_len, field, step, max_iters=max_iters, seed=seed)
        start = time.perf_counter()
        recs = run(cfg)
        out.append((recs, time.perf_counter() - start))
    return out


def _summary(runs):
    gaps = [recs[-1].gap for recs, _ in runs]
    dist = max(r.max_distance for recs, _ in runs for r in recs)
    slowest = max(t for _, t in runs)
    iters = [recs[-1].iter for recs, _ in runs]
    return gaps, dist, slowest, iters


@pytest.mark.slow
def test_c01_pca_benchmark():
    step = OrthoStepConfig("pogo", PCA_ETA, base="sgd", momentum=0.3)
    gaps, dist, slowest, iters = _summary(_benchmark("pca", step, SEEDS, p=150, n=200))
    mean_gap = float(np.mean(gaps))
    ok = mean_gap <= 1e-6 and dist <= 1e-8 and slowest < 60
    detail = (
        f"mean gap {mean_gap:.2e} (per seed {', '.join(f'{g:.1e}' for g in gaps)}), "
        f"iters {iters}, max distance {dist:.2e}, slowest run {slowest:.1f}s"
    )
    report(1, "PCA p=150 n=200 POGO", ok, detail)
    assert ok, detail


@pytest.mark.slow
@pytest.mark.parametrize("method", ["pogo", "slpg", "rgd"])
def test_c02_procrustes_benchmark(method):
    base = "sgd" if method == "pogo" else "none"
    step = OrthoStepConfig(method, PROCRUSTES_ETA[method], base=base, momentum=0.1)
    gaps, dist, slowest, iters = _summary(_benchmark("procrustes", step, SEEDS, p=200, n=200))
    converged = all(g <= 1e-6 for g in gaps)
    # the distance clause applies to POGO and SLPG; RGD has no speed or distance clause
    feasible = dist <= 1e-8 or method == "rgd"
    ok = converged and feasible and slowest < 60
    detail = (
        f"gaps {', '.join(f'{g:.1e}' for g in gaps)}, iters {iters}, "
        f"max distance {dist:.2e}, slowest run {slowest:.1f}s"
    )
    report(2, f"Procrustes p=n=200 {method}", ok, detail)
    assert ok, detail


def test_c03_tangent_step_bound():
    ok, detail, secs = _timed(verify.check_tangent_step_bound)
    ok = ok and secs < 1
    report(3, "tangent step bound", ok, f"{detail}, {secs:.2f}s")
    assert ok


def test_c04_normal_step_bound():
    ok, detail, secs = _timed(verify.check_normal_step_bound)
    ok = ok and secs < 5
    report(4, "normal step bound", ok, f"{detail}, {secs:.2f}s")
    assert ok


def test_c05_trajectory_bound():
    ok, detail, secs = _timed(verify.check_trajectory_bound)
    ok = ok and secs < 30
    report(5, "trajectory bound", ok, f"{detail}, {secs:.2f}s")
    assert ok


def test_c06_landing_polynomial_oracle():
    rng = np.random.default_rng(3)
    grid = np.linspace(0.0, 1.0, 11)
    worst = 0.0
    start = time.perf_counter()
    for field in (REAL, COMPLEX):
        for _ in range(100):
            p = int(rng.integers(1, 8))
            n = int(rng.integers(p, 12))
            m = gaussian(rng, (p, n), field) / np.sqrt(n)
            poly = landing_poly_from(m)
            for lam in grid:
                direct = verify._direct_poly(m, lam)
                worst = max(worst, abs(poly(lam) - direct) / max(direct, 1e-300))
    secs = time.perf_counter() - start
    ok = worst <= 1e-10 and secs < 5
    report(6, "landing polynomial oracle", ok, f"max relative error {worst:.2e}, {secs:.2f}s")
    assert ok


def test_c07_quartic_solver():
    roots_ok, roots_detail, secs = _timed(verify.check_quartic_roots)
    ties_ok, ties_detail = verify.check_tie_break()
    ok = roots_ok and ties_ok and secs < 1
    report(7, "quartic solver", ok, f"{roots_detail}; {ties_detail}, {secs:.2f}s")
    assert ok


def test_c08_gradient_checks():
    ok, detail, secs = _timed(verify.check_gradients)
    ok = ok and secs < 10
    report(8, "gradient finite differences", ok, f"{detail}, {secs:.2f}s")
    assert ok


def test_c09_field_orthogonality():
    ok, detail, _ = _timed(verify.check_field_orthogonality)
    report(9, "field orthogonality", ok, detail)
    assert ok


@pytest.mark.slow
def test_c10_unitary_procrustes():
    step = OrthoStepConfig("pogo", UNITARY_ETA)
    gaps, dist, slowest, iters = _summary(_benchmark("unitary-procrustes", step, [0], 64, 64, field=COMPLEX))
    ok = gaps[0] <= 1e-6 and dist <= 1e-8 and slowest < 30
    detail = f"gap {gaps[0]:.2e} after {iters[0]} iters, max distance {dist:.2e}, {slowest:.1f}s"
    report(10, "unitary Procrustes p=n=64", ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_c11_chain():
    step = OrthoStepConfig("pogo", CHAIN_ETA, base="vadam", momentum=0.9)
    cfg = RunConfig("chain", 64, 64, 8, REAL, step, max_iters=5000, gap_tol=1e-300, seed=0)
    start = time.perf_counter()
    recs = run(cfg)
    secs = time.perf_counter() - start
    ratio = recs[-1].loss / recs[0].loss
    dist = max(r.max_distance for r in recs)
    ok = ratio <= 0.1 and dist <= 1e-6 and secs < 300
    detail = f"loss ratio {ratio:.2e} after {recs[-1].iter} iters, max distance {dist:.2e}, {secs:.1f}s"
    report(11, "chain p=64 L=8", ok, detail)
    assert ok, detail


def test_c12_linearity_suite():
    ok, detail, secs = _timed(verify.check_linearity_suite)
    ok = ok and secs < 1
    report(12, "base optimizer linearity", ok, f"{detail}, {secs:.2f}s")
    assert ok


def test_c13_slpg_pogo_equivalence():
    """Same step size for both methods, at a single row and at square shapes."""
    rng = np.random.default_rng(8)
    worst = {}
    for p, n in ((1, 7), (6, 6)):
        for field in (REAL, COMPLEX):
            err = 0.0
            for _ in range(100):
                x = random_stiefel(p, n, field, rng).matrix
                g = 0.1 * gaussian(rng, (p, n), field)
                a, _ = slpg_step(x, g, OrthoStepConfig("slpg", 0.5))
                b, _ = pogo_step(x, g, OrthoStepConfig("pogo", 0.5), make_base())
                err = max(err, float(np.linalg.norm(a - b)))
            worst[(p, n, field)] = err
    ok = max(worst.values()) <= 1e-12
    detail = ", ".join(f"p={p} n={n} {f}: {e:.1e}" for (p, n, f), e in worst.items())
    report(13, "SLPG/POGO equivalence", ok, detail)
    assert ok, detail


def test_c14_gemm_count():
    ok, detail = verify.check_gemm_count()
    report(14, "POGO matrix products", ok, detail)
    assert ok
