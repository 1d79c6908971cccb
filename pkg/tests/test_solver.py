import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from designlift.designs import Sphere, stabilizer_design
from designlift.errors import ParameterError
from designlift.linalg import hermitian_to_vec, numerical_rank, random_low_rank, schatten_norm, vec_to_hermitian
from designlift.measurement import RecoveryProblem, lq_norm, sample_ensemble, simulate_measurements
from designlift.solver import (
    SolverConfig,
    diagnostics,
    feasibility_residual,
    project_ball,
    project_l1_ball,
    recover,
    recover_psd,
    subgradient_crosscheck,
)


def _l1_oracle(v, radius):
    # bisection on the soft-threshold level
    a = np.abs(v)
    if a.sum() <= radius:
        return v
    lo, hi = 0.0, a.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(a - mid, 0).sum() > radius:
            lo = mid
        else:
            hi = mid
    return np.sign(v) * np.maximum(a - hi, 0)


@given(arrays(float, st.integers(1, 12), elements=st.floats(-10, 10)), st.floats(0.01, 20))
def test_l1_projection(v, radius):
    p = project_l1_ball(v, radius)
    assert np.abs(p).sum() <= radius * (1 + 1e-9) + 1e-12
    assert np.allclose(p, _l1_oracle(v, radius), atol=1e-8)


@pytest.mark.parametrize("q", [1.0, 2.0, math.inf])
def test_ball_projection_lands_in_ball(q, rng):
    c = rng.standard_normal(6)
    v = c + 5 * rng.standard_normal(6)
    p = project_ball(v, c, 0.5, q)
    assert lq_norm(p - c, q) <= 0.5 + 1e-12
    inside = c + 0.01 * np.ones(6) / 6
    assert np.array_equal(project_ball(inside, c, 0.5, q), inside)
    with pytest.raises(ParameterError):
        project_ball(v, c, 0.5, 3.0)


def test_config_validation():
    with pytest.raises(ParameterError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ParameterError):
        SolverConfig(over_relaxation=2.0)
    with pytest.raises(ParameterError):
        SolverConfig(primal_tolerance=0.0)


@pytest.mark.parametrize("seed", range(5))
def test_informationally_complete_matches_linear_solve(seed):
    rng = np.random.default_rng(seed)
    X = random_low_rank(4, 2, rng)
    e = sample_ensemble(Sphere(4), 16, seed)
    p = simulate_measurements(e, X)
    oracle = vec_to_hermitian(np.linalg.solve(e.matrix(), p.observations), 4)
    res = recover(p)
    assert res.converged
    assert np.linalg.norm(res.solution - oracle) <= 1e-4 * np.linalg.norm(oracle)
    assert np.allclose(oracle, X, atol=1e-8)


def test_noiseless_low_rank_recovery():
    rng = np.random.default_rng(0)
    X = random_low_rank(8, 1, rng)
    p = simulate_measurements(sample_ensemble(stabilizer_design(3), 96, 1), X)
    res = recover(p)
    assert res.converged
    assert np.linalg.norm(res.solution - X) < 1e-4
    assert numerical_rank(res.solution) == 1
    assert res.objective == pytest.approx(schatten_norm(res.solution, "nuclear"))


def test_psd_variant():
    rng = np.random.default_rng(2)
    X = random_low_rank(4, 1, rng, psd=True)
    p = simulate_measurements(sample_ensemble(stabilizer_design(2), 14, 3), X)
    res = recover_psd(p)
    assert res.converged
    assert np.linalg.eigvalsh(res.solution).min() >= -1e-8
    assert np.linalg.norm(res.solution - X) < 1e-4


@pytest.mark.parametrize("q", [1.0, 2.0, math.inf])
def test_large_budget_gives_zero(q):
    rng = np.random.default_rng(1)
    e = sample_ensemble(Sphere(3), 12, 1)
    b = rng.standard_normal(12)
    res = recover(RecoveryProblem(e, b, lq_norm(b, q) * 1.01, q))
    assert res.converged
    assert np.linalg.norm(res.solution) < 1e-6


def test_scale_covariance():
    rng = np.random.default_rng(4)
    X = random_low_rank(4, 1, rng)
    p = simulate_measurements(sample_ensemble(stabilizer_design(2), 24, 5), X, eta=0.05, seed=6)
    cfg = SolverConfig(primal_tolerance=1e-9, dual_tolerance=1e-9, max_iterations=20000)
    base = recover(p, cfg)
    scaled = recover(RecoveryProblem(p.ensemble, 3.0 * p.observations, 0.15, 2.0), cfg)
    assert np.allclose(scaled.solution, 3.0 * base.solution, atol=1e-5)


@pytest.mark.parametrize("q", [1.0, 2.0, math.inf])
def test_noisy_solution_is_feasible(q):
    rng = np.random.default_rng(8)
    X = random_low_rank(4, 1, rng)
    p = simulate_measurements(sample_ensemble(stabilizer_design(2), 30, 9), X, eta=0.05, q=q, seed=1)
    res = recover(p)
    assert res.converged
    assert feasibility_residual(p, res.solution) <= 1e-6
    # the truth is feasible, so the optimum cannot exceed its nuclear norm
    assert res.objective <= schatten_norm(X, "nuclear") + 1e-6


def test_crosscheck_agrees_with_admm():
    rng = np.random.default_rng(3)
    X = random_low_rank(4, 1, rng)
    p = simulate_measurements(sample_ensemble(stabilizer_design(2), 20, 4), X, eta=0.1, seed=2)
    res = recover(p)
    cc = subgradient_crosscheck(p, budget=4000)
    # every crosscheck iterate is feasible, so it bounds the optimum from above
    assert cc.objective >= res.objective - 1e-6
    assert cc.objective <= res.objective * 1.02
    assert feasibility_residual(p, cc.solution) <= 1e-8
    with pytest.raises(ParameterError):
        subgradient_crosscheck(RecoveryProblem(p.ensemble, p.observations, 0.1, 1.0))


def test_history_and_callback():
    rng = np.random.default_rng(0)
    p = simulate_measurements(sample_ensemble(Sphere(3), 20, 0), random_low_rank(3, 1, rng))
    seen = []
    res = recover(p, callback=seen.append)
    assert len(seen) == res.iterations == len(res.history)
    assert set(seen[0]) >= {"primal_residual", "dual_residual", "objective", "penalty"}
    info = diagnostics(res, p)
    assert info["converged"] and info["rank"] == 1
    assert len(info["residual_history"]) == res.iterations


def test_iteration_cap_reports_nonconvergence():
    rng = np.random.default_rng(0)
    p = simulate_measurements(sample_ensemble(stabilizer_design(3), 30, 0), random_low_rank(8, 1, rng))
    res = recover(p, SolverConfig(max_iterations=3))
    assert not res.converged and res.iterations == 3


def test_solution_is_hermitian_vector_roundtrip():
    rng = np.random.default_rng(1)
    p = simulate_measurements(sample_ensemble(Sphere(3), 9, 1), random_low_rank(3, 1, rng))
    Z = recover(p).solution
    assert np.allclose(Z, Z.conj().T)
    assert np.allclose(vec_to_hermitian(hermitian_to_vec(Z), 3), Z)
