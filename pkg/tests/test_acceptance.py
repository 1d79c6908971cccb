"""Acceptance criteria 1-11, each at its stated tolerance.

Every test prints one ``[criterion N] PASS|FAIL`` line straight to the
terminal (bypassing capture), so ``pytest tests/test_acceptance.py`` gives a
one-line-per-criterion summary. Run as a script for the same output.
"""

import itertools
import math
import time

import numpy as np
import pytest

from designlift.designs import Sphere, design_accuracy, stabilizer_design
from designlift.experiments import ExperimentConfig, fit_noise_slope, format_report, run_grid
from designlift.linalg import random_hermitian, random_low_rank, vec_to_hermitian
from designlift.measurement import sample_ensemble, simulate_measurements
from designlift.solver import recover
from designlift.symmetric import sym3_trace, sym3_trace_dense
from designlift.theory import (
    THETA_GRID,
    cone_battery,
    exact_moment,
    lemma1_bound,
    paley_zygmund_check,
    second_moment_identity,
    small_ball_exact,
    third_moment_bound_check,
    wm_estimate,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def stab3():
    return stabilizer_design(3)


@pytest.fixture(scope="module")
def battery():
    return {
        (r, rho): cone_battery(8, r, rho, 200, seed=1000 + 10 * r + int(10 * rho))
        for r, rho in itertools.product((1, 2), (0.3, 0.5, 0.8))
    }


def test_criterion_01_sym3_trace(report):
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4, 5):
        rng = np.random.default_rng(n)
        for _ in range(100):
            X, Y, Z = (random_hermitian(n, rng) for _ in range(3))
            worst = max(worst, abs(sym3_trace(X, Y, Z) - sym3_trace_dense(X, Y, Z)))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-8 and elapsed < 10, f"max |formula - Kronecker| = {worst:.2e} (tol 1e-8), {elapsed:.1f}s")


def test_criterion_02_design_certification(report):
    start = time.perf_counter()
    thetas = {}
    for k in (1, 2, 3):
        d = stabilizer_design(k)
        for t in (1, 2, 3):
            method = "power" if (k, t) == (3, 3) else "auto"
            thetas[(k, t)] = design_accuracy(d, t, "inf", method=method)
    four = design_accuracy(stabilizer_design(1), 4, "inf")
    elapsed = time.perf_counter() - start
    worst = max(thetas.values())
    ok = worst <= 1e-9 and four > 1e-3 and elapsed < 60
    report(2, ok, f"max theta_inf (k<=3, t<=3) = {worst:.2e}; k=1 t=4 theta_inf = {four:.4f}; {elapsed:.1f}s")


def test_criterion_03_second_moment(report):
    worst = 0.0
    for k in (1, 2, 3):
        d = stabilizer_design(k)
        rng = np.random.default_rng(30 + k)
        for _ in range(50):
            Z = random_hermitian(d.dim, rng)
            worst = max(worst, abs(exact_moment(d, Z, 2) - second_moment_identity(Z)))
    report(3, worst <= 1e-9, f"max |E b^2 - (tr(Z)^2 + tr(Z^2))| = {worst:.2e} (tol 1e-9)")


def test_criterion_04_lemma1(report, stab3, battery):
    violations, checks, slack = 0, 0, math.inf
    for (r, rho), samples in battery.items():
        for theta in THETA_GRID:
            bound = lemma1_bound(theta, rho, r)
            for z in samples:
                q = small_ball_exact(stab3, z.matrix, theta)
                checks += 1
                violations += q < bound
                slack = min(slack, q - bound)
    report(4, violations == 0, f"{violations} violations in {checks} checks, min slack {slack:.3f}")


def test_criterion_05_third_moment(report, stab3, battery):
    violations, checks, ratio = 0, 0, 0.0
    for samples in battery.values():
        for z in samples:
            moment, bound, ok = third_moment_bound_check(stab3, z)
            checks += 1
            violations += not ok
            ratio = max(ratio, moment / bound)
    report(5, violations == 0, f"{violations} violations in {checks} checks, max moment/bound {ratio:.3f}")


def test_criterion_06_paley_zygmund(report):
    rng = np.random.default_rng(6)
    violations, checks = 0, 0
    for _ in range(1000):
        size = int(rng.integers(1, 65))
        W = rng.exponential(size=size) ** rng.uniform(0.2, 3.0)
        W[rng.random(size) < 0.2] = 0.0
        w = rng.dirichlet(np.full(size, rng.uniform(0.1, 2.0)))
        for p in (1.5, 2.0, 3.0):
            for theta in THETA_GRID:
                lhs, rhs, ok = paley_zygmund_check(W, w, p, theta)
                checks += 1
                violations += not ok
    report(6, violations == 0, f"{violations} violations in {checks} checks (tol 1e-12)")


def test_criterion_07_operator_norm(report, stab3):
    parts, ok = [], True
    for m in (50, 200):
        rep = wm_estimate(stab3, m, 500, seed=70 + m)
        ok &= rep.h_norm_within_proof_bound
        parts.append(f"m={m}: E||H|| = {rep.h_norm_estimate:.3f} +- {rep.h_norm_se:.3f}")
    report(7, ok, "; ".join(parts) + f" vs bound {rep.proof_bound:.3f}")


def test_criterion_08_solver_oracle(report):
    start = time.perf_counter()
    worst_truth, worst_oracle = 0.0, 0.0
    for i in range(20):
        rng = np.random.default_rng(800 + i)
        X = random_low_rank(4, 1 + i % 3, rng)
        e = sample_ensemble(Sphere(4), 16, 900 + i)
        p = simulate_measurements(e, X)
        oracle = vec_to_hermitian(np.linalg.solve(e.matrix(), p.observations), 4)
        Z = recover(p).solution
        worst_truth = max(worst_truth, np.linalg.norm(Z - X) / np.linalg.norm(X))
        worst_oracle = max(worst_oracle, np.linalg.norm(Z - oracle) / np.linalg.norm(oracle))
    elapsed = time.perf_counter() - start
    ok = worst_truth <= 1e-4 and worst_oracle <= 1e-4 and elapsed < 30
    report(8, ok, f"max rel error vs truth {worst_truth:.1e}, vs linear solve {worst_oracle:.1e}; {elapsed:.1f}s")


def test_criterion_09_phase_transition(report):
    start = time.perf_counter()
    grid = (12, 24, 48, 96, 144, 192)
    cfg = ExperimentConfig(designs=("stabilizer 3",), n=(8,), r=(1,), m=grid, trials=20, seed=9)
    rates = [c.success_rate for c in run_grid(cfg)]
    elapsed = time.perf_counter() - start
    drops = [a - b for a, b in zip(rates, rates[1:]) if b < a]
    monotone = len(drops) <= 1 and all(d <= 0.1 for d in drops)
    ok = rates[grid.index(144)] >= 0.9 and rates[0] <= 0.1 and monotone and elapsed < 600
    detail = ", ".join(f"m={m}:{s:.2f}" for m, s in zip(grid, rates))
    report(9, ok, f"success rates {detail}; {elapsed:.0f}s")


def test_criterion_10_noise_robustness(report):
    etas = tuple(i / 100 for i in range(11))
    cfg = ExperimentConfig(designs=("stabilizer 3",), n=(8,), r=(1,), m=(192,), trials=20,
                           noise=tuple((eta, 2.0) for eta in etas), kind="noise", seed=10)
    (fit,) = fit_noise_slope(run_grid(cfg))
    ok = fit.correlation >= 0.99 and fit.intercept - fit.floor <= 1e-3
    report(10, ok, f"corr {fit.correlation:.4f}, intercept {fit.intercept:.2e} vs floor {fit.floor:.2e}, "
                   f"slope {fit.slope:.4f}")


def test_criterion_11_reproducibility(report):
    cfg = ExperimentConfig(designs=("stabilizer 2", "sphere"), n=(4,), r=(1, 2), m=(8, 24),
                           noise=((0.0, 2.0), (0.05, 1.0)), trials=3, seed=11)
    runs = [format_report(run_grid(cfg, threads=t), cfg).encode() for t in (1, 1, 2, 4)]
    ok = all(r == runs[0] for r in runs)
    report(11, ok, f"{len(runs)} runs (threads 1, 1, 2, 4), {len(runs[0])} bytes each, identical={ok}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
