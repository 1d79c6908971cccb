"""Enumeration of multi-qubit stabilizer states.

A Pauli operator on ``k`` qubits is encoded as a ``2k``-bit integer whose low
``k`` bits are the X part and high ``k`` bits the Z part. Maximal commuting
subgroups correspond to Lagrangian subspaces of F_2^{2k} under the
symplectic form; each one, together with a sign choice on its generators,
fixes a unique state.
"""

import itertools
from functools import reduce

import numpy as np

from .errors import CapacityError

MAX_QUBITS = 3

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def split_bits(v, k):
    mask = (1 << k) - 1
    return v & mask, v >> k


def symplectic_product(u, v, k):
    ux, uz = split_bits(u, k)
    vx, vz = split_bits(v, k)
    return (bin(ux & vz).count("1") + bin(uz & vx).count("1")) % 2


def pauli_matrix(v, k):
    """Hermitian Pauli operator ``i^{x.z} X^x Z^z`` for the bit vector ``v``.

    Qubit 0 is the most significant tensor factor.
    """
    x, z = split_bits(v, k)
    factors = []
    for q in range(k):
        xb, zb = (x >> q) & 1, (z >> q) & 1
        f = (_X if xb else _I) @ (_Z if zb else _I)
        if xb and zb:
            f = 1j * f
        factors.append(f)
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def _span(gens):
    span = {0}
    for g in gens:
        span |= {s ^ g for s in span}
    return frozenset(span)


def lagrangian_subspaces(k):
    """All maximal isotropic subspaces, each with a canonical generator tuple.

    Generators are chosen greedily as the smallest elements that extend the
    span, so the result is deterministic and sorted.
    """
    nonzero = range(1, 1 << (2 * k))
    found = {}
    for gens in itertools.combinations(nonzero, k):
        if any(symplectic_product(a, b, k) for a, b in itertools.combinations(gens, 2)):
            continue
        span = _span(gens)
        if len(span) != 1 << k or span in found:
            continue
        canon = []
        acc = frozenset({0})
        for v in sorted(span):
            if v not in acc:
                canon.append(v)
                acc = _span(canon)
        found[span] = tuple(canon)
    return sorted(found.values())


def canonical_phase(psi, tol=1e-9):
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    idx = int(np.argmax(np.abs(psi) > tol))
    a = psi[idx]
    return psi * (np.abs(a) / a)


def stabilizer_states(k):
    """All ``2^k * prod_{j=1..k}(2^j + 1)`` stabilizer states on ``k`` qubits."""
    if not 1 <= k <= MAX_QUBITS:
        raise CapacityError(f"stabilizer enumeration supports 1 <= k <= {MAX_QUBITS}, got {k}")
    n = 1 << k
    states = []
    seen = set()
    for gens in lagrangian_subspaces(k):
        paulis = [pauli_matrix(g, k) for g in gens]
        for signs in itertools.product((1, -1), repeat=k):
            proj = np.eye(n, dtype=complex)
            for s, P in zip(signs, paulis):
                proj = proj @ (np.eye(n) + s * P) / 2
            col = int(np.argmax(np.linalg.norm(proj, axis=0)))
            psi = proj[:, col] / np.linalg.norm(proj[:, col])
            psi = canonical_phase(psi)
            key = tuple(np.round(np.concatenate([psi.real, psi.imag]), 9))
            if key in seen:
                continue
            seen.add(key)
            states.append(psi)
    return np.array(states)


def stabilizer_count(k):
    count = 1 << k
    for j in range(1, k + 1):
        count *= (1 << j) + 1
    return count
