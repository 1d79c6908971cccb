"""Nuclear-norm minimization over Hermitian matrices with an l_q data-fit ball.

The program ``min ||Z||_*  s.t.  ||A(Z) - b||_q <= eta`` is solved by ADMM on
the graph splitting

    minimize ||Z||_* + I_ball(y)   subject to   Z = W,  y = A(W)

so every step is closed form: spectral soft-thresholding for ``Z``, a
projection onto the l_q ball for ``y``, and one cached Cholesky solve with
``I + A^T A`` for ``W``. The data block is rescaled by the smallest nonzero
singular value of ``A`` so that both blocks of the splitting are comparably
conditioned; this changes nothing about the solution. Hermitian matrices are handled as vectors in
``R^{n^2}`` through the isometry in :mod:`designlift.linalg`, so iterates are
Hermitian by construction.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ParameterError
from .linalg import hermitian_to_vec, numerical_rank, schatten_norm, shrink, vec_to_hermitian
from .measurement import lq_norm


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 5000
    primal_tolerance: float = 1e-7
    dual_tolerance: float = 1e-7
    penalty: float = 1.0
    over_relaxation: float = 1.6
    adaptive_penalty: bool = True
    balance_ratio: float = 2.0
    balance_interval: int = 5
    max_penalty_updates: int = 40

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be at least 1")
        if self.primal_tolerance <= 0 or self.dual_tolerance <= 0:
            raise ParameterError("tolerances must be positive")
        if self.penalty <= 0:
            raise ParameterError("penalty must be positive")
        if not 1.0 <= self.over_relaxation <= 1.9:
            raise ParameterError("over_relaxation must lie in [1, 1.9]")
        if self.max_penalty_updates < 0:
            raise ParameterError("max_penalty_updates must be nonnegative")
        if self.balance_ratio <= 1 or self.balance_interval < 1:
            raise ParameterError("balance_ratio must exceed 1 and balance_interval must be positive")


@dataclass
class RecoveryResult:
    solution: np.ndarray
    objective: float
    feasibility_residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def project_l1_ball(v, radius):
    """Euclidean projection onto ``{x : ||x||_1 <= radius}`` (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    if radius <= 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    s = np.sort(a)[::-1]
    css = np.cumsum(s)
    k = np.arange(1, len(s) + 1)
    rho = np.nonzero(s * k > css - radius)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def project_ball(v, center, radius, q):
    d = np.asarray(v, dtype=float) - center
    if radius == 0:
        return np.array(center, dtype=float)
    if q == 2:
        nd = np.linalg.norm(d)
        return center + (d if nd <= radius else d * (radius / nd))
    if math.isinf(q):
        return center + np.clip(d, -radius, radius)
    if q == 1:
        return center + project_l1_ball(d, radius)
    raise ParameterError(f"unsupported noise exponent {q}")


def _spectral_prox(zvec, n, tau, psd):
    Z = vec_to_hermitian(zvec, n)
    lam, U = np.linalg.eigh(Z)
    lam = shrink(lam, tau)
    if psd:
        lam = np.maximum(lam, 0.0)
    return hermitian_to_vec((U * lam) @ U.conj().T), float(np.sum(np.abs(lam)))


def _data_scale(M):
    s = np.linalg.svd(M, compute_uv=False)
    s = s[s > 1e-10 * s.max()] if s.size and s.max() > 0 else s
    return float(s.min()) if s.size else 1.0


def feasibility_residual(problem, Z):
    M = problem.ensemble.matrix()
    r = M @ hermitian_to_vec(Z) - problem.observations
    return max(lq_norm(r, problem.noise_exponent) - problem.noise_budget, 0.0)


def _solve(problem, cfg, psd, callback):
    if problem.noise_budget < 0:
        raise ParameterError(f"noise budget must be nonnegative, got {problem.noise_budget}")
    e = problem.ensemble
    n, m = e.dim, e.count
    M0 = e.matrix()
    b0 = problem.observations
    q = problem.noise_exponent
    c = _data_scale(M0)
    M, b, eta = M0 / c, b0 / c, problem.noise_budget / c
    chol = cho_factor(np.eye(n * n) + M.T @ M)

    # tolerances are stated in the units of b and applied to the rescaled block
    tol_p = cfg.primal_tolerance * max(1.0, float(np.linalg.norm(b0))) / c
    tol_d = cfg.dual_tolerance * max(1.0, float(np.linalg.norm(b0))) / c
    alpha = cfg.over_relaxation
    rho = cfg.penalty

    w = np.zeros(n * n)
    Mw = np.zeros(m)
    u1 = np.zeros(n * n)
    u2 = np.zeros(m)
    z = w
    updates = 0
    history = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        z, objective = _spectral_prox(w - u1, n, 1.0 / rho, psd)
        y = project_ball(Mw - u2, b, eta, q)
        zh = alpha * z + (1 - alpha) * w
        yh = alpha * y + (1 - alpha) * Mw
        w_old = w
        w = cho_solve(chol, (zh + u1) + M.T @ (yh + u2))
        Mw = M @ w
        u1 += zh - w
        u2 += yh - Mw

        dw = w - w_old
        r_norm = math.sqrt(np.sum((z - w) ** 2) + np.sum((y - Mw) ** 2))
        s_norm = rho * math.sqrt(np.sum(dw**2) + np.sum((M @ dw) ** 2))
        feas = max(lq_norm(M @ z - b, q) - eta, 0.0)
        record = {
            "iteration": it,
            "primal_residual": r_norm,
            "dual_residual": s_norm,
            "feasibility": feas * c,
            "objective": objective,
            "penalty": rho,
        }
        history.append(record)
        if callback is not None:
            callback(record)
        if r_norm <= tol_p and s_norm <= tol_d and feas <= tol_p:
            converged = True
            break
        # residual balancing; freezing the penalty after a bounded number of
        # changes keeps the usual fixed-penalty convergence guarantee
        if cfg.adaptive_penalty and updates < cfg.max_penalty_updates and it % cfg.balance_interval == 0:
            if r_norm > cfg.balance_ratio * s_norm:
                rho *= 2.0
                u1 /= 2.0
                u2 /= 2.0
                updates += 1
            elif s_norm > cfg.balance_ratio * r_norm:
                rho /= 2.0
                u1 *= 2.0
                u2 *= 2.0
                updates += 1

    Z = vec_to_hermitian(z, n)
    return RecoveryResult(
        solution=Z,
        objective=schatten_norm(Z, "nuclear"),
        feasibility_residual=max(lq_norm(M0 @ z - b0, q) - problem.noise_budget, 0.0),
        iterations=it,
        converged=converged,
        history=history,
    )


def recover(problem, cfg=None, callback=None):
    """Solve the nuclear-norm program for ``problem``.

    ``callback``, if given, receives a dict of per-iteration residuals.
    Non-convergence is reported through ``converged=False``, not raised.
    """
    return _solve(problem, cfg or SolverConfig(), psd=False, callback=callback)


def recover_psd(problem, cfg=None, callback=None):
    """Same program restricted to the PSD cone (PhaseLift)."""
    return _solve(problem, cfg or SolverConfig(), psd=True, callback=callback)


# -- independent cross-check ---------------------------------------------------

@dataclass
class CrosscheckResult:
    objective: float
    solution: np.ndarray
    iterations: int
    exhausted: bool


class _EllipsoidProjector:
    """Projection onto ``{w : ||M w - b||_2 <= eta}`` via the SVD of ``M``."""

    def __init__(self, M, b, eta):
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        keep = s > s.max() * 1e-12 if s.size else s > 0
        self.U, self.s, self.Vt = U[:, keep], s[keep], Vt[keep]
        self.beta = self.U.T @ b
        self.perp2 = float(np.sum(b**2) - np.sum(self.beta**2))
        self.M, self.b, self.eta = M, b, eta
        if self.perp2 > eta**2 * (1 + 1e-9) + 1e-18:
            raise ParameterError("constraint set is empty: b is too far from the range of A")

    def __call__(self, v):
        if np.linalg.norm(self.M @ v - self.b) <= self.eta:
            return v
        alpha = self.Vt @ v
        s, beta = self.s, self.beta
        budget = max(self.eta**2 - self.perp2, 0.0)

        def coef(lam):
            return (alpha + lam * s * beta) / (1.0 + lam * s**2)

        def excess(lam):
            return float(np.sum((s * coef(lam) - beta) ** 2)) - budget

        if budget <= 0:
            c = beta / s
        else:
            lo, hi = 0.0, 1.0
            while excess(hi) > 0 and hi < 1e300:
                hi *= 2.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if excess(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            c = coef(hi)
        return v + self.Vt.T @ (c - alpha)


def subgradient_crosscheck(problem, budget=3000, patience=300):
    """Projected subgradient descent on the same program (``q = 2`` only).

    Every iterate is projected onto the feasible set, so the best objective
    seen is an upper bound on the optimum. ``exhausted`` is set when the
    iteration budget ran out while the best value was still improving.
    """
    if problem.noise_exponent != 2:
        raise ParameterError("the subgradient cross-check supports q = 2 only")
    e = problem.ensemble
    n = e.dim
    proj = _EllipsoidProjector(e.matrix(), problem.observations, problem.noise_budget)
    w = proj(np.zeros(n * n))
    best_w, best = w, schatten_norm(vec_to_hermitian(w, n), "nuclear")
    step0 = max(np.linalg.norm(w), 1e-12)
    since_improved = 0
    it = 0
    for it in range(1, budget + 1):
        Z = vec_to_hermitian(w, n)
        lam, U = np.linalg.eigh(Z)
        g = hermitian_to_vec((U * np.sign(lam)) @ U.conj().T)
        gnorm = np.linalg.norm(g)
        if gnorm == 0:
            break
        w = proj(w - (0.5 * step0 / math.sqrt(it)) * g / gnorm)
        val = schatten_norm(vec_to_hermitian(w, n), "nuclear")
        if val < best - 1e-12 * max(1.0, best):
            best, best_w = val, w
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= patience:
                break
    exhausted = it >= budget and since_improved < patience
    return CrosscheckResult(best, vec_to_hermitian(best_w, n), it, exhausted)


def diagnostics(result, problem):
    """Summary report for a finished solve."""
    X = result.solution
    op = schatten_norm(X, "operator")
    rank = numerical_rank(X, 1e-6) if op > 0 else 0
    return {
        "converged": result.converged,
        "iterations": result.iterations,
        "objective": result.objective,
        "feasibility_residual": feasibility_residual(problem, X),
        "rank": rank,
        "residual_history": [(h["primal_residual"], h["dual_residual"]) for h in result.history],
    }
