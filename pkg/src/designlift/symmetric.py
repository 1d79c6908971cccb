"""Projector onto the totally symmetric subspace of (C^n)^{\\otimes t}."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ParameterError
from .linalg import check_hermitian

DENSE_BUDGET = 4096


def sym_dimension(n, t):
    return math.comb(n + t - 1, t)


def _permutation_matrix(n, t, perm):
    size = n**t
    idx = np.arange(size).reshape((n,) * t)
    src = np.transpose(idx, perm).ravel()
    P = np.zeros((size, size))
    P[np.arange(size), src] = 1.0
    return P


def symmetrize_tensor(v, n, t):
    """Average a flat length-``n**t`` vector over all axis permutations."""
    T = np.asarray(v).reshape((n,) * t)
    perms = list(itertools.permutations(range(t)))
    out = sum(np.transpose(T, p) for p in perms) / len(perms)
    return out.reshape(-1)


@dataclass(frozen=True)
class SymmetrizerProjector:
    base_dim: int
    tensor_power: int
    matrix: np.ndarray | None = None

    @property
    def size(self):
        return self.base_dim**self.tensor_power

    @property
    def is_dense(self):
        return self.matrix is not None

    def apply(self, v):
        """Apply the projector to a vector (or to the columns of a matrix)."""
        v = np.asarray(v)
        if self.matrix is not None:
            return self.matrix @ v
        if v.ndim == 1:
            return symmetrize_tensor(v, self.base_dim, self.tensor_power)
        return np.stack(
            [symmetrize_tensor(col, self.base_dim, self.tensor_power) for col in v.T], axis=1
        )

    def trace(self):
        if self.matrix is not None:
            return float(np.trace(self.matrix))
        return float(sym_dimension(self.base_dim, self.tensor_power))


def sym_projector(n, t, dense=True, budget=DENSE_BUDGET):
    """Symmetrizer on ``t`` copies of ``C^n``.

    The dense form is the average of the ``t!`` permutation matrices and is
    only built when ``n**t <= budget``; ``dense=False`` returns the
    matrix-free applicator.
    """
    if n < 1:
        raise ParameterError(f"dimension must be positive, got {n}")
    if t not in (1, 2, 3, 4):
        raise ParameterError(f"tensor power must be in 1..4, got {t}")
    if not dense:
        return SymmetrizerProjector(n, t)
    if n**t > budget:
        raise CapacityError(
            f"dense symmetrizer needs {n**t} rows, over the budget of {budget}; "
            "use sym_projector(..., dense=False) for the matrix-free applicator"
        )
    perms = list(itertools.permutations(range(t)))
    P = sum(_permutation_matrix(n, t, p) for p in perms) / len(perms)
    P.setflags(write=False)
    return SymmetrizerProjector(n, t, P)


def sym3_trace(X, Y, Z):
    """``tr(P_Sym3 (X kron Y kron Z))`` from traces of products of the factors."""
    X, Y, Z = check_hermitian(X), check_hermitian(Y), check_hermitian(Z)
    if not X.shape == Y.shape == Z.shape:
        raise ParameterError(f"dimension mismatch: {X.shape}, {Y.shape}, {Z.shape}")
    tx, ty, tz = np.trace(X), np.trace(Y), np.trace(Z)
    total = (
        tx * ty * tz
        + tx * np.trace(Y @ Z)
        + ty * np.trace(X @ Z)
        + tz * np.trace(X @ Y)
        + np.trace(X @ Y @ Z)
        + np.trace(X @ Z @ Y)
    ) / 6.0
    return float(total.real)


def sym3_trace_dense(X, Y, Z):
    """Brute-force reference: build the ``n^3 x n^3`` Kronecker product explicitly."""
    n = np.asarray(X).shape[0]
    P = sym_projector(n, 3).matrix
    K = np.kron(np.kron(X, Y), Z)
    return complex(np.trace(P @ K))
