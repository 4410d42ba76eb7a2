"""Pauli strings and the averaged-Pauli projector Q.

``Q = d^-2 sum_P P^{(x)4}`` factorises qubit-wise as ``Q_2^{(x)N}`` once the
4N tensor factors are regrouped qubit-by-qubit, with
``Q_2 = (I^4 + X^4 + Y^4 + Z^4) / 4``.  Permutation operators factorise the
same way, so every trace of Q against permutation operators (and against
tensor products of Pauli strings) reduces to per-qubit 16-dimensional traces.
Nothing here builds the ``d^4``-dimensional Q except :func:`dense_q`, which
exists for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .s4 import CLASSES, IRREPS, PERMS, IrrepLabel, Perm4, cycle_class, irrep_trace, perm_operator

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_1Q = {"I": I2, "X": X, "Y": Y, "Z": Z}
_LETTER_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_XZ_LETTER = {v: k for k, v in _LETTER_XZ.items()}


@dataclass(frozen=True)
class PauliString:
    """``i^phase`` times a tensor product of Hermitian single-qubit Paulis.

    Qubit 0 is the leftmost letter and the most significant bit of a
    computational-basis index.
    """

    letters: str
    phase: int = 0  # power of i

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"bad Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        return cls("".join(letter if q == qubit else "I" for q in range(n)))

    @classmethod
    def from_xz(cls, x, z, phase: int = 0) -> "PauliString":
        return cls("".join(_XZ_LETTER[(int(a), int(b))] for a, b in zip(x, z)), phase)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def x(self) -> np.ndarray:
        return np.array([_LETTER_XZ[c][0] for c in self.letters], dtype=np.uint8)

    @property
    def z(self) -> np.ndarray:
        return np.array([_LETTER_XZ[c][1] for c in self.letters], dtype=np.uint8)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(q for q, c in enumerate(self.letters) if c != "I")

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def sign(self) -> complex:
        return 1j ** self.phase

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("Pauli strings have different lengths")
        phase = self.phase + other.phase
        out = []
        for a, b in zip(self.letters, other.letters):
            c, ph = _single_product(a, b)
            out.append(c)
            phase += ph
        return PauliString("".join(out), phase)

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, self.phase + 2)

    def matrix(self) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for c in self.letters:
            out = np.kron(out, PAULI_1Q[c])
        return self.sign * out

    def __repr__(self):
        return f"{['+', '+i', '-', '-i'][self.phase]}{self.letters}"


@lru_cache(maxsize=None)
def _single_product(a: str, b: str) -> tuple[str, int]:
    m = PAULI_1Q[a] @ PAULI_1Q[b]
    for c, p in PAULI_1Q.items():
        ov = np.trace(p.conj().T @ m) / 2
        if abs(ov) > 0.5:
            return c, int(round(np.angle(ov) / (np.pi / 2))) % 4
    raise AssertionError


def pauli_commutation_sign(p1: PauliString, p2: PauliString) -> int:
    """+1 if the two strings commute, -1 if they anticommute."""
    if p1.n != p2.n:
        raise ValueError("Pauli strings have different lengths")
    if not (p1.is_hermitian and p2.is_hermitian):
        raise ValueError("commutation sign is defined for Hermitian Pauli strings")
    s = int(np.sum(p1.x & p2.z) + np.sum(p1.z & p2.x)) % 2
    return -1 if s else 1


def all_pauli_strings(n: int) -> list[PauliString]:
    """All 4^n Hermitian Pauli strings, ordered by the base-4 digits I<X<Y<Z."""
    import itertools

    return [PauliString("".join(t)) for t in itertools.product("IXYZ", repeat=n)]


# ---------------------------------------------------------------- Q factor

def q2_operator() -> np.ndarray:
    """The single-qubit factor ``Q_2`` as a dense 16x16 matrix."""
    out = np.zeros((16, 16), dtype=complex)
    for p in PAULI_1Q.values():
        out += np.kron(np.kron(p, p), np.kron(p, p))
    return out / 4


def _q_table() -> dict[tuple[int, ...], int]:
    # tr(Q_2 T_s) = 1/4 sum_P prod_cycles tr(P^len)
    table = {}
    for c in CLASSES:
        total = 0
        for p in PAULI_1Q.values():
            prod = 1
            for length in c.cycle_type:
                prod *= np.trace(np.linalg.matrix_power(p, length))
            total += prod
        table[c.cycle_type] = int(round((total / 4).real))
    return table


Q_TABLE: dict[tuple[int, ...], int] = _q_table()


def q_value(s: Perm4) -> int:
    """Per-qubit trace ``tr(Q_2 T_s)``."""
    return Q_TABLE[s.cycle_type]


def trace_q_T(s: Perm4, n_qubits: int) -> int:
    """``tr(Q T_s)`` on N qubits; exact integer."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    return q_value(s) ** n_qubits


def q_trace_vector(n_qubits: int) -> list[int]:
    return [trace_q_T(p, n_qubits) for p in PERMS]


def d_pm_lambda(lam: IrrepLabel, n_qubits: int) -> tuple[int, int]:
    """``(D+_lambda, D-_lambda) = (tr(Q Pi_lambda), tr(Q_perp Pi_lambda))``.

    A zero entry means that irrep is absent from the corresponding block and
    must be skipped in the restricted Weingarten sums.
    """
    plus = Fraction(lam.dim, 24) * sum(lam.chi(p) * trace_q_T(p, n_qubits) for p in PERMS)
    assert plus.denominator == 1
    total = irrep_trace(lam, 2 ** n_qubits)
    return int(plus), total - int(plus)


def d_pm_table(n_qubits: int) -> dict[IrrepLabel, tuple[int, int]]:
    return {lam: d_pm_lambda(lam, n_qubits) for lam in IRREPS}


# ------------------------------------------------------- dense helpers

def regroup_permutation(n_qubits: int) -> np.ndarray:
    """Index map for the regrouping S: copy-major (c, q) order -> qubit-major (q, c) order.

    Returns ``perm`` such that ``x.transpose(perm)`` turns a tensor with axes
    ``(c0q0, c0q1, ..., c3q(N-1))`` into axes ``(q0c0, q0c1, ..., q(N-1)c3)``.
    """
    return np.array([c * n_qubits + q for q in range(n_qubits) for c in range(4)])


def dense_q(n_qubits: int) -> np.ndarray:
    """Dense Q on 4 copies of N qubits (oracle use only; N <= 2)."""
    if n_qubits > 2:
        raise ValueError("dense Q is only built for N <= 2")
    d = 2 ** n_qubits
    out = np.zeros((d ** 4, d ** 4), dtype=complex)
    for p in all_pauli_strings(n_qubits):
        m = p.matrix()
        out += np.kron(np.kron(m, m), np.kron(m, m))
    return out / d ** 2


def operator_traces(op: np.ndarray, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """The 48 traces ``(tr(O Q T_s), tr(O T_s))`` of a dense operator on 4 copies.

    Q is applied through its per-qubit factorisation; the dense Q is never formed.
    """
    d = 2 ** n_qubits
    if op.shape != (d ** 4, d ** 4):
        raise ValueError(f"operator shape {op.shape} does not match N={n_qubits}")
    n4 = 4 * n_qubits
    regroup = regroup_permutation(n_qubits)
    t = op.reshape((2,) * (2 * n4))
    t = t.transpose(list(regroup) + [n4 + i for i in regroup])
    # now rows/cols are grouped per qubit: reshape to (16,)*N rows and cols
    t = t.reshape((16,) * n_qubits * 2)
    q2 = q2_operator()
    qv = np.empty(24, dtype=complex)
    tv = np.empty(24, dtype=complex)
    for i, s in enumerate(PERMS):
        t2 = perm_operator(s, 2)
        qt = q2 @ t2
        tv[i] = _contract_product(t, t2, n_qubits)
        qv[i] = _contract_product(t, qt, n_qubits)
    return qv, tv


def _contract_product(t: np.ndarray, m: np.ndarray, n_qubits: int) -> complex:
    # tr(O (m (x) m (x) ... (x) m)) with O given qubit-grouped as (16,)*N x (16,)*N
    cur = t
    for _ in range(n_qubits):
        # contract the first row axis and the first remaining column axis
        ncur = cur.ndim // 2
        cur = np.tensordot(cur, m, axes=([0, ncur], [1, 0]))
        # tensordot leaves no new axes (both indices of m are contracted)
    return complex(cur)


def pauli4_traces(paulis: tuple[PauliString, PauliString, PauliString, PauliString]):
    """Exact traces ``(tr(P Q T_s), tr(P T_s))`` for ``P = P1 (x) P2 (x) P3 (x) P4``.

    Computed qubit by qubit, so any N is cheap.  Values are returned as
    Fractions when real, complex otherwise.
    """
    n = paulis[0].n
    if any(p.n != n for p in paulis):
        raise ValueError("Pauli strings have different lengths")
    phase = 1j ** sum(p.phase for p in paulis)
    q2 = q2_operator()
    qv, tv = [], []
    for s in PERMS:
        t2 = perm_operator(s, 2)
        prod_q, prod_t = phase, phase
        for q in range(n):
            a, b, c, dd = (PAULI_1Q[p.letters[q]] for p in paulis)
            m = np.kron(np.kron(a, b), np.kron(c, dd))
            prod_t *= np.trace(m @ t2)
            prod_q *= np.trace(m @ q2 @ t2)
        qv.append(_exactify(prod_q))
        tv.append(_exactify(prod_t))
    return qv, tv


def _exactify(z: complex):
    z = complex(z)
    re, im = round(z.real), round(z.imag)
    if abs(z.real - re) < 1e-6 and abs(z.imag - im) < 1e-6:
        return Fraction(re) if im == 0 else complex(re, im)
    return z


# ------------------------------------------------------------- states

def trace_psi4_Q(state) -> float | Fraction:
    """``tr(psi^{(x)4} Q) = <psi|^4 Q |psi>^4``.

    ``state`` may be ``"zero"`` together with a qubit count (as a tuple
    ``("zero", N)``), a sequence of single-qubit vectors (product state), or a
    dense state vector (N <= 6).
    """
    if isinstance(state, tuple) and state and state[0] == "zero":
        return Fraction(1, 2 ** int(state[1]))
    if isinstance(state, (list, tuple)):
        val = 1.0
        for v in state:
            val *= _single_qubit_q(np.asarray(v, dtype=complex))
        return val
    psi = np.asarray(state, dtype=complex).ravel()
    return _dense_trace_psi4_q(psi)


def _single_qubit_q(v: np.ndarray) -> float:
    _check_norm(v)
    # <v|^4 Q_2 |v>^4 = 1/4 sum_P <v|P|v>^4
    return float(sum((np.vdot(v, p @ v).real) ** 4 for p in PAULI_1Q.values()) / 4)


def _check_norm(psi: np.ndarray):
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-10:
        raise ValueError(f"state is not normalised (norm {nrm})")


def _dense_trace_psi4_q(psi: np.ndarray) -> float:
    _check_norm(psi)
    n = int(round(np.log2(psi.size)))
    if 2 ** n != psi.size:
        raise ValueError("state length is not a power of two")
    if n > 6:
        raise ValueError("dense path is limited to N <= 6")
    # tr(psi^4 Q) = d^-2 sum_P <psi|P|psi>^4
    total = 0.0
    for p in all_pauli_strings(n):
        total += np.vdot(psi, p.matrix() @ psi).real ** 4
    return float(total / psi.size ** 2)


def random_product_state(n_qubits: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Qubit-wise Haar-random (uniform Bloch sphere) product state."""
    out = []
    for _ in range(n_qubits):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        out.append(v / np.linalg.norm(v))
    return out


def product_state_vector(factors) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for v in factors:
        out = np.kron(out, v)
    return out


def random_product_trace_q_mean(n_qubits: int) -> Fraction:
    """Local-Haar average of ``tr(psi^4 Q)`` over product states: ``(2/5)^N``."""
    return Fraction(2, 5) ** n_qubits


__all__ = [
    "PauliString", "pauli_commutation_sign", "all_pauli_strings", "q2_operator", "Q_TABLE",
    "q_value", "trace_q_T", "q_trace_vector", "d_pm_lambda", "d_pm_table", "dense_q",
    "operator_traces", "pauli4_traces", "trace_psi4_Q", "random_product_state",
    "product_state_vector", "random_product_trace_q_mean", "cycle_class",
]
