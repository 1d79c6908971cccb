"""Dense Hermitian matrix utilities.

Matrices are plain complex ``numpy`` arrays; the functions here validate the
Hermitian property on entry and return new arrays (inputs are never mutated).
"""

from typing import NamedTuple

import numpy as np

from .errors import HermitianError, ParameterError

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-12


class SpectralDecomposition(NamedTuple):
    """Eigenvalues sorted by descending absolute value, eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        U, lam = self.eigenvectors, self.eigenvalues
        return (U * lam) @ U.conj().T


def max_asymmetry(Z):
    Z = np.asarray(Z)
    if Z.size == 0:
        return 0.0
    return float(np.max(np.abs(Z - Z.conj().T)))


def check_hermitian(Z, tol=HERMITIAN_TOL):
    """Return ``Z`` as a complex square array, raising if it is not Hermitian.

    The tolerance is absolute per entry, scaled by ``max(1, max|Z_ij|)`` so that
    large-magnitude matrices produced by floating point arithmetic still pass.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {Z.shape}")
    scale = max(1.0, float(np.max(np.abs(Z)))) if Z.size else 1.0
    asym = max_asymmetry(Z)
    if asym > tol * scale:
        raise HermitianError(asym, tol * scale)
    return Z


def hermitian_part(Z):
    Z = np.asarray(Z, dtype=complex)
    return 0.5 * (Z + Z.conj().T)


def _sort_by_magnitude(lam, U):
    # stable sort keeps index order as the final tiebreak
    order = np.argsort(-np.abs(lam), kind="stable")
    return SpectralDecomposition(lam[order], U[:, order])


def jacobi_eigh(Z, tol=JACOBI_TOL, max_sweeps=100):
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each rotation first removes the phase of the pivot ``A[p, q]`` with a
    diagonal unitary and then applies a real Givens rotation. Iteration stops
    once the off-diagonal Frobenius mass falls below ``tol * ||A||_F``.
    Returns ``(eigenvalues, eigenvectors)`` in the order they sit on the
    diagonal.
    """
    A = np.array(Z, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    norm = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        if np.linalg.norm(A - np.diag(np.diag(A))) <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = 0.5 * np.arctan2(2.0 * mag, (A[q, q] - A[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] on columns p, q
                j_pp, j_pq = c, s
                j_qp, j_qq = -s * np.conj(phase), c * np.conj(phase)
                colp, colq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = colp * j_pp + colq * j_qp
                A[:, q] = colp * j_pq + colq * j_qq
                rowp, rowq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = np.conj(j_pp) * rowp + np.conj(j_qp) * rowq
                A[q, :] = np.conj(j_pq) * rowp + np.conj(j_qq) * rowq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = vp * j_pp + vq * j_qp
                V[:, q] = vp * j_pq + vq * j_qq
    return np.diag(A).real.copy(), V


def eig_hermitian(Z, method="lapack"):
    """Spectral decomposition of a Hermitian matrix.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` uses the
    pure-numpy cyclic Jacobi sweep above. Both results are sorted by
    descending ``|eigenvalue|``.
    """
    Z = check_hermitian(Z)
    if method == "lapack":
        lam, U = np.linalg.eigh(hermitian_part(Z))
    elif method == "jacobi":
        lam, U = jacobi_eigh(hermitian_part(Z))
    else:
        raise ParameterError(f"unknown eigensolver {method!r}")
    return _sort_by_magnitude(lam, U)


def rank_split(Z, r):
    """Split ``Z`` into its best rank-``r`` part and the remainder."""
    Z = check_hermitian(Z)
    n = Z.shape[0]
    if not 1 <= r <= n:
        raise ParameterError(f"rank parameter must satisfy 1 <= r <= {n}, got {r}")
    dec = eig_hermitian(Z)
    U, lam = dec.eigenvectors[:, :r], dec.eigenvalues[:r]
    Zr = (U * lam) @ U.conj().T
    return Zr, Z - Zr


def eigvals_hermitian(Z):
    return np.linalg.eigvalsh(hermitian_part(check_hermitian(Z)))


def schatten_norm(Z, which="nuclear"):
    lam = np.abs(eigvals_hermitian(Z))
    if which == "nuclear":
        return float(np.sum(lam))
    if which == "frobenius":
        return float(np.sqrt(np.sum(lam**2)))
    if which == "operator":
        return float(np.max(lam)) if lam.size else 0.0
    raise ParameterError(f"unknown norm {which!r}; use nuclear, frobenius or operator")


def shrink(x, tau):
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt(Z, tau, psd=False):
    """Soft-threshold the spectrum of ``Z`` by ``tau``.

    With ``psd=True`` negative eigenvalues are clamped to zero after
    thresholding, which is the proximal map of ``tau * tr(Z)`` on the PSD cone.
    """
    if tau < 0:
        raise ParameterError(f"threshold must be nonnegative, got {tau}")
    Z = hermitian_part(check_hermitian(Z, tol=1e-9))
    lam, U = np.linalg.eigh(Z)
    lam = shrink(lam, tau)
    if psd:
        lam = np.maximum(lam, 0.0)
    out = (U * lam) @ U.conj().T
    return hermitian_part(out)


def abs_hermitian(Z):
    """Spectral absolute value ``|Z| = U |diag(lam)| U^H``."""
    lam, U = np.linalg.eigh(hermitian_part(check_hermitian(Z)))
    return hermitian_part((U * np.abs(lam)) @ U.conj().T)


def numerical_rank(Z, rel_tol=1e-6):
    lam = np.abs(eigvals_hermitian(Z))
    if lam.size == 0 or lam.max() == 0.0:
        return 0
    return int(np.sum(lam > rel_tol * lam.max()))


# Isometry between n x n Hermitian matrices and R^{n^2}: diagonal entries
# first, then sqrt(2) Re and sqrt(2) Im of the strict upper triangle.

def hermitian_to_vec(Z):
    Z = np.asarray(Z, dtype=complex)
    n = Z.shape[0]
    iu = np.triu_indices(n, 1)
    off = Z[iu]
    return np.concatenate([Z.diagonal().real, np.sqrt(2) * off.real, np.sqrt(2) * off.imag])


def vec_to_hermitian(v, n):
    v = np.asarray(v, dtype=float)
    k = n * (n - 1) // 2
    Z = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    off = (v[n : n + k] + 1j * v[n + k :]) / np.sqrt(2)
    Z[iu] = off
    Z = Z + Z.conj().T
    Z[np.diag_indices(n)] = v[:n]
    return Z


def random_hermitian(n, rng):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (G + G.conj().T)


def haar_unitary(n, rng):
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = R.diagonal()
    return Q * (d / np.abs(d))


def random_low_rank(n, r, rng, psd=False):
    """Rank-``r`` Hermitian matrix with Haar eigenvectors, unit Frobenius norm."""
    if not 1 <= r <= n:
        raise ParameterError(f"rank must satisfy 1 <= r <= {n}, got {r}")
    U = haar_unitary(n, rng)[:, :r]
    lam = rng.standard_normal(r)
    if psd:
        lam = np.abs(lam)
    lam /= np.linalg.norm(lam)
    return hermitian_part((U * lam) @ U.conj().T)
