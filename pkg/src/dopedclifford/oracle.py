"""Ground-truth fourth-moment channels by explicit group enumeration (N <= 2).

Operators on four copies are handled through their Pauli-basis coefficient
tensors ``o[a1, a2, a3, a4]``.  A Clifford acts as a signed permutation of each
index, and the average over the Pauli subgroup keeps exactly the components
whose four symplectic vectors sum to zero.  The Clifford average is the Pauli
average composed with the average over one representative per Pauli coset.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .clifford import pauli_basis, symplectic_representatives
from .engine import phase_gate



def to_pauli_coefficients(op: np.ndarray, n: int) -> np.ndarray:
    """Coefficients ``o`` with ``op = sum_a o[a] P_a1 (x) P_a2 (x) P_a3 (x) P_a4``."""
    d = 1 << n
    op = np.asarray(op, dtype=complex)
    if op.shape != (d ** 4, d ** 4):
        raise ValueError("operator shape does not match N")
    basis = np.array(pauli_basis(n))  # (4^n, d, d)
    # coefficient per copy: tr(P_a X) / d = sum_{r,c} P_a[c, r] X[r, c] / d
    proj = basis.transpose(0, 2, 1).reshape(len(basis), d * d) / d
    t = op.reshape((d,) * 8).transpose(0, 4, 1, 5, 2, 6, 3, 7).reshape((d * d,) * 4)
    for axis in range(4):
        t = np.moveaxis(np.tensordot(proj, t, axes=([1], [axis])), 0, axis)
    return t


def from_pauli_coefficients(coeffs: np.ndarray, n: int) -> np.ndarray:
    d = 1 << n
    basis = np.array(pauli_basis(n)).reshape(4 ** n, d * d)
    t = coeffs
    for axis in range(4):
        t = np.moveaxis(np.tensordot(basis.T, t, axes=([1], [axis])), 0, axis)
    t = t.reshape((d,) * 8).transpose(0, 2, 4, 6, 1, 3, 5, 7)
    return t.reshape(d ** 4, d ** 4)


@lru_cache(maxsize=None)
def _pauli_vectors(n: int) -> np.ndarray:
    """Symplectic vectors of the Pauli basis in the order of :func:`pauli_basis`."""
    from .pauli import all_pauli_strings

    out = []
    for p in all_pauli_strings(n):
        x = sum(int(b) << q for q, b in enumerate(p.x))
        z = sum(int(b) << q for q, b in enumerate(p.z))
        out.append(x | (z << n))
    return np.array(out, dtype=np.int64)


@lru_cache(maxsize=None)
def _pauli_average_mask(n: int) -> np.ndarray:
    v = _pauli_vectors(n)
    total = v[:, None, None, None] ^ v[None, :, None, None] ^ v[None, None, :, None] ^ v[None, None, None, :]
    return (total == 0).astype(float)


@lru_cache(maxsize=None)
def _representative_actions(n: int):
    perms, signs = [], []
    for _, perm, sign in symplectic_representatives(n):
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        perms.append(inv)
        signs.append(sign)
    return np.array(perms), np.array(signs)


def clifford_twirl_coefficients(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Exact average of ``C^4 O C^4dag`` over the Clifford group, in the Pauli basis."""
    inv_perms, signs = _representative_actions(n)
    acc = np.zeros_like(coeffs)
    for inv, s in zip(inv_perms, signs):
        weighted = coeffs * s[:, None, None, None] * s[None, :, None, None] * s[None, None, :, None] * s[None, None, None, :]
        acc += weighted[np.ix_(inv, inv, inv, inv)]
    return acc / len(inv_perms) * _pauli_average_mask(n)


def _k_conjugate(op: np.ndarray, n: int, k_gate: np.ndarray, qubit: int) -> np.ndarray:
    full = np.array([[1.0 + 0j]])
    for q in range(n):
        full = np.kron(full, k_gate if q == qubit else np.eye(2))
    k4 = np.kron(np.kron(full, full), np.kron(full, full))
    return k4 @ op @ k4.conj().T


def exact_group_channels(n: int, k_max: int, theta: float | None, op: np.ndarray,
                         k_gate: np.ndarray | None = None, qubit: int = 0):
    """Yield the enumerated doped channel applied to ``op`` for ``k = 0 .. k_max``."""
    if n > 2:
        raise ValueError("enumeration oracle is limited to N <= 2")
    if k_max < 0:
        raise ValueError("k must be non-negative")
    if k_max > 0 and k_gate is None and theta is None:
        raise ValueError("doped channel needs theta or an explicit K gate")
    gate = np.asarray(k_gate, dtype=complex) if k_gate is not None else (phase_gate(theta) if k_max else None)
    coeffs = clifford_twirl_coefficients(to_pauli_coefficients(op, n), n)
    dense = from_pauli_coefficients(coeffs, n)
    yield dense
    for _ in range(k_max):
        dense = _k_conjugate(dense, n, gate, qubit)
        coeffs = clifford_twirl_coefficients(to_pauli_coefficients(dense, n), n)
        dense = from_pauli_coefficients(coeffs, n)
        yield dense


def exact_group_channel(n: int, k: int, theta: float | None, op: np.ndarray,
                        k_gate: np.ndarray | None = None, qubit: int = 0) -> np.ndarray:
    """Average of ``U^4 O U^4dag`` over ``U = C_k K C_{k-1} ... K C_0`` by enumeration."""
    *_, last = exact_group_channels(n, k, theta, op, k_gate, qubit)
    return last


def brute_force_twirl(op: np.ndarray, n: int, unitaries) -> np.ndarray:
    """Direct average of ``U^4 O U^4dag`` over a list of unitaries (slow; N = 1 cross-check)."""
    acc = np.zeros_like(op, dtype=complex)
    for u in unitaries:
        u4 = np.kron(np.kron(u, u), np.kron(u, u))
        acc += u4 @ op @ u4.conj().T
    return acc / len(unitaries)


__all__ = [
    "to_pauli_coefficients", "from_pauli_coefficients", "clifford_twirl_coefficients",
    "exact_group_channel", "exact_group_channels", "brute_force_twirl",
]
