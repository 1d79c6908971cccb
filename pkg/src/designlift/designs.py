"""Weighted complex projective designs: construction, file I/O and certification."""

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import io
from .errors import CapacityError, ConvergenceError, InvariantError, ParameterError
from .stabilizer import stabilizer_states
from .symmetric import DENSE_BUDGET, sym_dimension, sym_projector

UNIT = "unit"
SUPER_NORMALIZED = "super_normalized"

NORM_TOL = 1e-10
WEIGHT_TOL = 1e-12


def super_normalization_factor(n):
    return (n * (n + 1)) ** 0.25


@dataclass(frozen=True, eq=False)
class Design:
    """Weighted set of vectors ``{p_i, w_i}``; ``vectors`` has one row per vector."""

    dim: int
    vectors: np.ndarray
    weights: np.ndarray
    normalization: str = UNIT

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=complex, ndmin=2)
        weights = np.array(self.weights, dtype=float, ndmin=1)
        if self.normalization not in (UNIT, SUPER_NORMALIZED):
            raise InvariantError(f"unknown normalization mode {self.normalization!r}")
        if vectors.shape[1] != self.dim:
            raise InvariantError(f"vectors have length {vectors.shape[1]}, expected {self.dim}")
        if len(weights) != len(vectors):
            raise InvariantError(f"{len(weights)} weights for {len(vectors)} vectors")
        if len(weights) == 0:
            raise InvariantError("a design needs at least one vector")
        neg = np.flatnonzero(weights < 0)
        if neg.size:
            raise InvariantError(f"negative weight {weights[neg[0]]} at index {neg[0]}", index=int(neg[0]))
        total = weights.sum()
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvariantError(f"weights sum to {total!r}, not 1")
        target = 1.0 if self.normalization == UNIT else super_normalization_factor(self.dim)
        norms = np.linalg.norm(vectors, axis=1)
        bad = np.flatnonzero(np.abs(norms - target) > NORM_TOL * max(1.0, target))
        if bad.size:
            i = int(bad[0])
            raise InvariantError(f"vector {i} has norm {norms[i]!r}, expected {target!r}", index=i)
        vectors.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self):
        return len(self.weights)

    def unit_vectors(self):
        if self.normalization == UNIT:
            return self.vectors
        return self.vectors / super_normalization_factor(self.dim)


@dataclass(frozen=True)
class Sphere:
    """Uniform (Haar) distribution on the unit sphere of ``C^dim``."""

    dim: int


@dataclass(frozen=True)
class DesignCertificate:
    t: int
    theta_1: float
    theta_inf: float
    frame_deviation: float
    method: str


def uniform_design(vectors):
    vectors = np.asarray(vectors, dtype=complex)
    N = len(vectors)
    return Design(vectors.shape[1], vectors, np.full(N, 1.0 / N))


def stabilizer_design(k):
    """Uniformly weighted stabilizer states on ``k`` qubits (dimension ``2^k``)."""
    return uniform_design(stabilizer_states(k))


def sample_sphere(n, count, rng):
    G = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def sphere_sampler(n, seed):
    """Endless stream of Haar-random unit vectors in ``C^n``."""
    if n < 1:
        raise ParameterError(f"dimension must be positive, got {n}")
    rng = np.random.default_rng(seed)
    while True:
        yield sample_sphere(n, 1, rng)[0]


def perturb_design(d, scale, seed):
    """Add ``scale``-sized complex Gaussian noise to every vector, then renormalize."""
    rng = np.random.default_rng(seed)
    V = d.unit_vectors()
    V = V + scale * (rng.standard_normal(V.shape) + 1j * rng.standard_normal(V.shape)) / np.sqrt(2)
    V = V / np.linalg.norm(V, axis=1, keepdims=True)
    return Design(d.dim, V, d.weights)


def super_normalize(d):
    if d.normalization != UNIT:
        raise ParameterError("design is already super-normalized")
    return replace(d, vectors=d.vectors * super_normalization_factor(d.dim), normalization=SUPER_NORMALIZED)


def save_design(path, d):
    Path(path).write_text(io.format_design(d))


def load_design(path):
    n, weights, vectors, mode = io.read_design_file(path)
    return Design(n, vectors, weights, mode)


# -- certification -----------------------------------------------------------

def _require_unit(d):
    if d.normalization != UNIT:
        raise ParameterError("certification expects a unit-normalized design")


def tensor_rows(d, t):
    """Row ``i`` is the flattened ``w_i^{\\otimes t}``."""
    V = d.unit_vectors()
    rows = V
    for _ in range(t - 1):
        rows = np.einsum("ia,ib->iab", rows, V).reshape(len(V), -1)
    return rows


def moment_operator(d, t):
    U = tensor_rows(d, t)
    return (U.T * d.weights) @ U.conj()


def deviation_operator(d, t, budget=DENSE_BUDGET):
    """Dense ``sum_i p_i (w_i w_i^*)^{\\otimes t} - P_Sym^t / binom(n+t-1, t)``."""
    _require_unit(d)
    n = d.dim
    if n**t > budget:
        raise CapacityError(f"dense deviation operator needs {n**t} rows, over the budget of {budget}")
    P = sym_projector(n, t, budget=budget).matrix
    return moment_operator(d, t) - P / sym_dimension(n, t)


def deviation_applicator(d, t):
    """Matrix-free version of :func:`deviation_operator` acting on flat tensors."""
    _require_unit(d)
    U = tensor_rows(d, t)
    Uc = U.conj()
    p = d.weights
    P = sym_projector(d.dim, t, dense=False)
    scale = 1.0 / sym_dimension(d.dim, t)

    def apply(v):
        return U.T @ (p * (Uc @ v)) - scale * P.apply(v)

    return apply


def power_iteration_norm(apply, size, seed=0, max_iter=500, rtol=1e-9, atol=1e-28):
    """Operator norm of a Hermitian operator by power iteration on its square.

    Returns the norm estimate; raises :class:`ConvergenceError` carrying the
    last estimate and the relative change if ``max_iter`` is exhausted.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    v /= np.linalg.norm(v)
    mu_prev = None
    change = math.inf
    for it in range(1, max_iter + 1):
        w = apply(v)
        mu = float(np.vdot(w, w).real)  # <v, D^2 v> for Hermitian D
        if mu <= atol:
            return 0.0
        if mu_prev is not None:
            change = abs(mu - mu_prev) / mu
            if change < rtol:
                return math.sqrt(mu)
        mu_prev = mu
        w2 = apply(w)
        v = w2 / np.linalg.norm(w2)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (relative change {change:.2e})",
        estimate=math.sqrt(mu_prev),
        residual=change,
        iterations=max_iter,
    )


def design_accuracy(d, t, norm="inf", method="auto", budget=DENSE_BUDGET, seed=0, max_iter=500):
    """Design accuracy ``theta_p = binom(n+t-1, t) * ||Delta||_p``.

    ``norm="one"`` is the nuclear norm of the deviation and needs the dense
    operator; ``norm="inf"`` is the operator norm and may use power iteration
    (``method="power"``). ``method="auto"`` picks dense when it fits the budget.
    """
    _require_unit(d)
    if t not in (1, 2, 3, 4):
        raise ParameterError(f"tensor power must be in 1..4, got {t}")
    if norm not in ("one", "inf"):
        raise ParameterError(f"norm must be 'one' or 'inf', got {norm!r}")
    n = d.dim
    if method == "auto":
        method = "dense" if n**t <= budget else "power"
    if method == "power":
        if norm == "one":
            raise ParameterError("the nuclear-norm accuracy needs the dense path")
        raw = power_iteration_norm(deviation_applicator(d, t), n**t, seed=seed, max_iter=max_iter)
    elif method == "dense":
        lam = np.linalg.eigvalsh(deviation_operator(d, t, budget=budget))
        raw = float(np.sum(np.abs(lam))) if norm == "one" else float(np.max(np.abs(lam)))
    else:
        raise ParameterError(f"unknown method {method!r}")
    return sym_dimension(n, t) * raw


def frame_check(d):
    """``|| sum_i p_i w_i w_i^* - id/n ||_inf`` on unit-normalized vectors."""
    V = d.unit_vectors()
    F = (V.T * d.weights) @ V.conj() - np.eye(d.dim) / d.dim
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (F + F.conj().T)))))


def certify(d, t, method="auto", budget=DENSE_BUDGET, seed=0):
    if method == "auto":
        method = "dense" if d.dim**t <= budget else "power_iteration"
    if method == "dense":
        theta_1 = design_accuracy(d, t, "one", "dense", budget)
        theta_inf = design_accuracy(d, t, "inf", "dense", budget)
    else:
        theta_1 = math.nan
        theta_inf = design_accuracy(d, t, "inf", "power", budget, seed=seed)
    return DesignCertificate(t, theta_1, theta_inf, frame_check(d), method)
