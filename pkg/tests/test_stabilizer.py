import itertools

import numpy as np
import pytest

from designlift.errors import CapacityError
from designlift.stabilizer import (
    lagrangian_subspaces,
    pauli_matrix,
    stabilizer_count,
    stabilizer_states,
    symplectic_product,
)


@pytest.mark.parametrize("k,count", [(1, 6), (2, 60), (3, 1080)])
def test_counts(k, count):
    assert stabilizer_count(k) == count
    assert len(stabilizer_states(k)) == count


@pytest.mark.parametrize("k,count", [(1, 3), (2, 15), (3, 135)])
def test_lagrangian_subspace_counts(k, count):
    assert len(lagrangian_subspaces(k)) == count


@pytest.mark.parametrize("k", [1, 2])
def test_symplectic_product_matches_commutation(k):
    for u, v in itertools.product(range(1 << (2 * k)), repeat=2):
        P, Q = pauli_matrix(u, k), pauli_matrix(v, k)
        commute = np.allclose(P @ Q, Q @ P)
        assert commute == (symplectic_product(u, v, k) == 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_paulis_are_hermitian_involutions(k):
    n = 1 << k
    for v in range(1 << (2 * k)):
        P = pauli_matrix(v, k)
        assert np.allclose(P, P.conj().T)
        assert np.allclose(P @ P, np.eye(n))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_states_are_distinct_unit_vectors(k):
    S = stabilizer_states(k)
    assert np.allclose(np.linalg.norm(S, axis=1), 1.0)
    overlaps = np.abs(S.conj() @ S.T) ** 2
    np.fill_diagonal(overlaps, 0.0)
    assert overlaps.max() < 1 - 1e-9
    # stabilizer overlaps take values in {0, 2^-j}
    allowed = [0.0] + [2.0**-j for j in range(k + 1)]
    assert np.all(np.min(np.abs(overlaps[..., None] - allowed), axis=-1) < 1e-9)


def test_single_qubit_states_are_octahedron():
    S = stabilizer_states(1)
    bloch = []
    for psi in S:
        rho = np.outer(psi, psi.conj())
        bloch.append([np.trace(rho @ pauli_matrix(v, 1)).real for v in (1, 3, 2)])
    bloch = np.round(np.array(bloch), 12)
    expected = {tuple(s * np.eye(3)[i]) for i in range(3) for s in (1.0, -1.0)}
    assert {tuple(b) for b in bloch} == expected


def test_capacity_limit():
    with pytest.raises(CapacityError):
        stabilizer_states(4)
    with pytest.raises(CapacityError):
        stabilizer_states(0)
