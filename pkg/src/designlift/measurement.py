"""Rank-one measurement ensembles, the measurement operator and its adjoint."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .designs import UNIT, Design, Sphere, sample_sphere
from .errors import InvariantError, ParameterError
from .linalg import check_hermitian, hermitian_part, hermitian_to_vec

NOISE_SHAPES = ("adversarial_uniform", "gaussian_rescaled")


def measurement_scaling(n):
    return math.sqrt(n * (n + 1))


@dataclass(frozen=True, eq=False)
class MeasurementEnsemble:
    """Unit vectors ``a_1..a_m``; the operator uses ``A_j = scaling * a_j a_j^*``."""

    dim: int
    vectors: np.ndarray
    scaling: float
    seed: int | None = None
    indices: np.ndarray | None = None

    def __post_init__(self):
        V = np.array(self.vectors, dtype=complex, ndmin=2)
        if V.shape[1] != self.dim:
            raise InvariantError(f"vectors have length {V.shape[1]}, expected {self.dim}")
        norms = np.linalg.norm(V, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-10)
        if bad.size:
            raise InvariantError(f"measurement vector {bad[0]} is not unit norm", index=int(bad[0]))
        if self.scaling != measurement_scaling(self.dim):
            raise InvariantError(f"scaling {self.scaling!r} != sqrt(n(n+1)) for n={self.dim}")
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)

    @property
    def count(self):
        return len(self.vectors)

    def matrix(self):
        """The operator as an ``m x n^2`` real matrix on the isometric Hermitian basis."""
        return self.scaling * np.stack([hermitian_to_vec(np.outer(a, a.conj())) for a in self.vectors])


@dataclass(frozen=True, eq=False)
class RecoveryProblem:
    ensemble: MeasurementEnsemble
    observations: np.ndarray
    noise_budget: float = 0.0
    noise_exponent: float = 2.0
    noise: np.ndarray | None = None

    def __post_init__(self):
        b = np.asarray(self.observations, dtype=float)
        if b.shape != (self.ensemble.count,):
            raise InvariantError(f"expected {self.ensemble.count} observations, got shape {b.shape}")
        if self.noise_budget < 0:
            raise ParameterError(f"noise budget must be nonnegative, got {self.noise_budget}")
        if self.noise_exponent not in (1.0, 2.0, math.inf):
            raise ParameterError(f"noise exponent must be 1, 2 or inf, got {self.noise_exponent}")
        object.__setattr__(self, "observations", b)

    @property
    def dim(self):
        return self.ensemble.dim


def sample_ensemble(source, m, seed):
    """Draw ``m`` i.i.d. measurement vectors from a design or the sphere."""
    if m < 1:
        raise ParameterError(f"need at least one measurement, got m={m}")
    rng = np.random.default_rng(seed)
    if isinstance(source, Sphere):
        V = sample_sphere(source.dim, m, rng)
        return MeasurementEnsemble(source.dim, V, measurement_scaling(source.dim), seed)
    if not isinstance(source, Design):
        raise ParameterError(f"cannot sample from {type(source).__name__}")
    if source.normalization != UNIT:
        raise ParameterError("sample from the unit-normalized design; scaling lives in the ensemble")
    idx = rng.choice(source.size, size=m, p=source.weights)
    return MeasurementEnsemble(source.dim, source.vectors[idx], measurement_scaling(source.dim), seed, idx)


def apply_operator(e, Z):
    """``b_j = sqrt(n(n+1)) * a_j^* Z a_j``."""
    Z = check_hermitian(Z, tol=1e-9)
    if Z.shape != (e.dim, e.dim):
        raise ParameterError(f"matrix is {Z.shape}, ensemble dimension is {e.dim}")
    vals = np.einsum("ja,ab,jb->j", e.vectors.conj(), Z, e.vectors)
    return e.scaling * vals.real


def adjoint_operator(e, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (e.count,):
        raise ParameterError(f"expected a vector of length {e.count}, got shape {y.shape}")
    V = e.vectors
    return hermitian_part(e.scaling * (V.T * y) @ V.conj())


def lq_norm(x, q):
    x = np.abs(np.asarray(x, dtype=float))
    if math.isinf(q):
        return float(x.max()) if x.size else 0.0
    return float(np.sum(x**q) ** (1.0 / q))


def draw_noise(m, eta, q, noise_shape, rng):
    """Noise vector with ``||eps||_q == eta`` exactly (zero when ``eta == 0``)."""
    if eta < 0:
        raise ParameterError(f"noise level must be nonnegative, got {eta}")
    if noise_shape not in NOISE_SHAPES:
        raise ParameterError(f"unknown noise shape {noise_shape!r}")
    if eta == 0:
        return np.zeros(m)
    if noise_shape == "adversarial_uniform":
        eps = rng.choice([-1.0, 1.0], size=m)
    else:
        eps = rng.standard_normal(m)
    return eps * (eta / lq_norm(eps, q))


def simulate_measurements(e, X, eta=0.0, q=2.0, noise_shape="gaussian_rescaled", seed=None):
    rng = np.random.default_rng(seed)
    eps = draw_noise(e.count, eta, q, noise_shape, rng)
    b = apply_operator(e, X) + eps
    return RecoveryProblem(e, b, eta, q, eps)


def save_ensemble(path, e):
    Path(path).write_text(io.format_ensemble(e))


def load_ensemble(path):
    n, m, scaling, seed, vectors = io.read_ensemble_file(path)
    return MeasurementEnsemble(n, vectors, scaling, seed)


def save_observations(path, problem):
    Path(path).write_text(io.format_observations(problem.observations, problem.noise_exponent, problem.noise_budget))


def load_problem(ensemble_path, obs_path):
    e = load_ensemble(ensemble_path)
    b, q, eta = io.read_observations_file(obs_path)
    return RecoveryProblem(e, b, eta, q)
