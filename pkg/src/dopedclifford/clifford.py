"""Clifford group: uniform sampling, unitary lifts and enumeration for N <= 2.

A symplectic vector on N qubits is stored as one integer with 2N bits: bit
``q`` is the X component and bit ``N + q`` the Z component of qubit ``q``.
The Hermitian Pauli with vector ``(x, z)`` is ``i^{|x & z|} X^x Z^z``.

Sampling follows the transvection construction: for each qubit ``j`` in turn a
uniform image ``v`` of ``X_j`` and a uniform image ``u`` of ``Z_j`` with
``<v, u> = 1`` are drawn, both supported on qubits ``j..N-1``, and a product of
at most four symplectic transvections realising them is recorded.  The
transvection ``x -> x + <x, h> h`` lifts to ``(1 + i P_h) / sqrt 2``.  A final
uniformly random Pauli fixes all signs, which makes the result uniform on the
Clifford group modulo phases.  Each qubit level always records four slots;
slot value 0 stands for "no transvection".
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PAULI_1Q, PauliString

SLOTS_PER_QUBIT = 4
MAX_BITS = 62


def _check_n(n: int):
    if n < 1:
        raise ValueError("need at least one qubit")
    if 2 * n > MAX_BITS:
        raise ValueError(f"N={n} exceeds the bit-packed symplectic range")


def _parity(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64) & 1


def symplectic_product(a, b, n: int):
    """``<a, b> = x_a . z_b + z_a . x_b mod 2`` for bit-packed vectors (vectorised)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    low = (1 << n) - 1
    return _parity(((a & low) & (b >> n)) ^ ((a >> n) & (b & low)))


def transvect(x, h, n: int):
    """Apply the transvection ``x -> x + <x, h> h`` (h = 0 is the identity)."""
    x = np.asarray(x, dtype=np.int64)
    h = np.asarray(h, dtype=np.int64)
    return x ^ (symplectic_product(x, h, n) * h)


def _spread(r: np.ndarray, n: int, j: int) -> np.ndarray:
    """Place a 2m-bit draw (m = n - j) onto qubits j..n-1 of the packed layout."""
    m = n - j
    low = (1 << m) - 1
    return ((r & low) << j) | ((r >> m) << (n + j))


def _partner(v: np.ndarray, n: int) -> np.ndarray:
    """A vector ``w`` with ``<v, w> = 1``: the conjugate of v's lowest nonzero qubit."""
    low = (1 << n) - 1
    support = (v & low) | (v >> n)
    lowest = support & -support
    has_x = (v & lowest) != 0
    return np.where(has_x, lowest << n, lowest)


def sample_symplectic_slots(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Transvection slots of ``size`` uniform symplectic matrices, shape ``(size, 4n)``.

    Slots are in composition order: the matrix is ``Z_{s[0]} o Z_{s[1]} o ...``.
    """
    _check_n(n)
    slots = np.zeros((size, SLOTS_PER_QUBIT * n), dtype=np.int64)
    for j in range(n):
        m = n - j
        xj = np.int64(1 << j)
        zj = np.int64(1 << (n + j))
        v = _spread(rng.integers(1, 4 ** m, size=size, dtype=np.int64), n, j)
        u = _spread(rng.integers(0, 4 ** m, size=size, dtype=np.int64), n, j)
        u = np.where(symplectic_product(v, u, n) == 1, u, u ^ _partner(v, n))
        # T: X_j -> v with at most two transvections (h1 applied first)
        direct = symplectic_product(np.full(size, xj), v, n) == 1
        same = v == xj
        vj_x = (v & xj) != 0
        z_mid = np.where(vj_x, zj, zj ^ _partner(v, n))
        h1 = np.where(same, 0, np.where(direct, xj ^ v, xj ^ z_mid))
        h2 = np.where(same | direct, 0, z_mid ^ v)
        # u' = T^{-1} u; B fixes X_j and sends Z_j -> u'
        up = transvect(transvect(u, h2, n), h1, n)
        one = symplectic_product(np.full(size, zj), up, n) == 1
        trivial = up == zj
        h3 = np.where(one, zj ^ up, np.where(trivial, 0, xj))
        h4 = np.where(one | trivial, 0, xj ^ zj ^ up)
        base = SLOTS_PER_QUBIT * j
        slots[:, base:base + 4] = np.stack([h2, h1, h4, h3], axis=1)
    return slots


def slots_symplectic_images(slots: np.ndarray, n: int) -> np.ndarray:
    """Images of the 2N basis vectors ``X_0..X_{N-1}, Z_0..Z_{N-1}`` under each sampled matrix."""
    slots = np.atleast_2d(slots)
    basis = np.array([1 << b for b in range(2 * n)], dtype=np.int64)
    out = np.broadcast_to(basis, (slots.shape[0], 2 * n)).copy()
    for s in range(slots.shape[1] - 1, -1, -1):
        out = transvect(out, slots[:, s:s + 1], n)
    return out


# ------------------------------------------------------------ state action

@lru_cache(maxsize=None)
def _qubit_to_index_masks(n: int) -> np.ndarray:
    """Map an N-bit qubit mask to a basis-index mask (qubit 0 is the most significant bit)."""
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(masks)
    for q in range(n):
        out |= ((masks >> q) & 1) << (n - 1 - q)
    return out


def apply_pauli(states: np.ndarray, vec: np.ndarray, n: int) -> np.ndarray:
    """Apply the Hermitian Pauli ``vec[b]`` to ``states[b]`` along axis 1.

    ``states`` has shape ``(B, d)`` or ``(B, d, m)``; ``vec`` has shape ``(B,)``.
    """
    vec = np.asarray(vec, dtype=np.int64)
    low = (1 << n) - 1
    table = _qubit_to_index_masks(n)
    xi = table[vec & low]
    zi = table[vec >> n]
    d = 1 << n
    idx = np.arange(d, dtype=np.int64)[None, :] ^ xi[:, None]
    sign = 1 - 2 * _parity(idx & zi[:, None])
    phase = (1j) ** (np.bitwise_count((vec & low) & (vec >> n)).astype(np.int64) % 4)
    if states.ndim == 2:
        gathered = np.take_along_axis(states, idx, axis=1)
        return gathered * (sign * phase[:, None])
    gathered = np.take_along_axis(states, idx[:, :, None], axis=1)
    return gathered * (sign * phase[:, None])[:, :, None]


def apply_transvection(states: np.ndarray, h: np.ndarray, n: int) -> np.ndarray:
    """Apply ``(1 + i P_h)/sqrt 2`` per batch entry; entries with ``h = 0`` are untouched."""
    active = h != 0
    if not np.any(active):
        return states
    out = states.copy()
    sub = states[active]
    out[active] = (sub + 1j * apply_pauli(sub, h[active], n)) / np.sqrt(2)
    return out


@dataclass(frozen=True, eq=False)
class CliffordBatch:
    """A batch of Clifford unitaries ``P_b * R_{s[0]} R_{s[1]} ...`` (modulo phase)."""

    n: int
    slots: np.ndarray
    pauli: np.ndarray

    def __len__(self):
        return self.slots.shape[0]

    def apply(self, states: np.ndarray) -> np.ndarray:
        """Act on states of shape ``(B, d)`` or ``(B, d, m)``."""
        if states.shape[0] != len(self) or states.shape[1] != 1 << self.n:
            raise ValueError("state batch does not match the Clifford batch")
        out = states
        for s in range(self.slots.shape[1] - 1, -1, -1):
            out = apply_transvection(out, self.slots[:, s], self.n)
        return apply_pauli(out, self.pauli, self.n)

    def element(self, i: int) -> "CliffordElement":
        return CliffordElement(self.n, tuple(int(h) for h in self.slots[i]), int(self.pauli[i]))

    def symplectic_images(self) -> np.ndarray:
        return slots_symplectic_images(self.slots, self.n)


def sample_clifford_batch(n: int, size: int, rng: np.random.Generator) -> CliffordBatch:
    """``size`` independent uniform Clifford elements (modulo global phase)."""
    slots = sample_symplectic_slots(n, size, rng)
    pauli = rng.integers(0, 4 ** n, size=size, dtype=np.int64)
    return CliffordBatch(n, slots, pauli)


@dataclass(frozen=True)
class CliffordElement:
    """One Clifford unitary given by transvection slots and a Pauli, modulo phase."""

    n: int
    transvections: tuple[int, ...]
    pauli: int = 0

    def batch(self) -> CliffordBatch:
        slots = np.array([self.transvections or (0,)], dtype=np.int64)
        return CliffordBatch(self.n, slots, np.array([self.pauli], dtype=np.int64))

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Act on a state vector ``(d,)`` or a matrix ``(d, m)`` column-wise."""
        return self.batch().apply(np.asarray(state, dtype=complex)[None])[0]

    def unitary(self) -> np.ndarray:
        if self.n > 8:
            raise ValueError("dense unitary is limited to N <= 8")
        return self.apply(np.eye(1 << self.n, dtype=complex))

    def symplectic(self) -> np.ndarray:
        """2N x 2N matrix over GF(2); column ``c`` is the image of basis vector ``c``."""
        images = self.batch().symplectic_images()[0]
        bits = (images[None, :] >> np.arange(2 * self.n)[:, None]) & 1
        return bits.astype(np.uint8)

    def tableau(self) -> tuple[np.ndarray, np.ndarray]:
        """``(symplectic, phases)``: phases[c] = 1 when the image of basis Pauli c carries a minus sign."""
        u = self.unitary()
        sym = self.symplectic()
        phases = np.zeros(2 * self.n, dtype=np.uint8)
        for c in range(2 * self.n):
            src = _basis_pauli(self.n, c).matrix()
            img = PauliString.from_xz(sym[:self.n, c], sym[self.n:, c]).matrix()
            ov = np.trace(img @ u @ src @ u.conj().T) / (1 << self.n)
            phases[c] = 0 if ov.real > 0 else 1
        return sym, phases


def _basis_pauli(n: int, c: int) -> PauliString:
    letters = ["I"] * n
    letters[c % n] = "X" if c < n else "Z"
    return PauliString("".join(letters))


def sample_clifford(n: int, rng: np.random.Generator) -> CliffordElement:
    """One uniform Clifford element (modulo global phase)."""
    return sample_clifford_batch(n, 1, rng).element(0)


def is_symplectic(m: np.ndarray) -> bool:
    n = m.shape[0] // 2
    omega = np.block([[np.zeros((n, n), int), np.eye(n, dtype=int)], [np.eye(n, dtype=int), np.zeros((n, n), int)]])
    return bool(np.all((m.T.astype(int) @ omega @ m.astype(int)) % 2 == omega))


def symplectic_group_order(n: int) -> int:
    order = 2 ** (n * n)
    for j in range(1, n + 1):
        order *= 4 ** j - 1
    return order


def clifford_group_order(n: int) -> int:
    """Order of the Clifford group modulo phases: ``4^n |Sp(2n, 2)|``."""
    return 4 ** n * symplectic_group_order(n)


# ------------------------------------------------------------ enumeration

def _gate_unitaries(n: int) -> list[np.ndarray]:
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    gens = []
    for q in range(n):
        for g in (h, s):
            m = np.array([[1.0 + 0j]])
            for j in range(n):
                m = np.kron(m, g if j == q else np.eye(2))
            gens.append(m)
    if n == 2:
        cx = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
        xc = np.eye(4, dtype=complex)[[0, 3, 2, 1]]
        gens += [cx, xc]
    return gens


def pauli_basis(n: int) -> list[np.ndarray]:
    from .pauli import all_pauli_strings

    return [p.matrix() for p in all_pauli_strings(n)]


def signed_pauli_action(u: np.ndarray, basis: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """``U P_a U^dag = sign[a] P_{perm[a]}`` over the Hermitian Pauli basis."""
    d = u.shape[0]
    stack = np.array(basis)
    perm = np.empty(len(basis), dtype=np.intp)
    sign = np.empty(len(basis))
    for a, p in enumerate(basis):
        m = u @ p @ u.conj().T
        ov = np.einsum("bij,ji->b", stack, m) / d
        b = int(np.argmax(np.abs(ov)))
        if abs(abs(ov[b]) - 1) > 1e-9 or abs(ov[b].imag) > 1e-9:
            raise ValueError("unitary is not Clifford")
        perm[a] = b
        sign[a] = np.sign(ov[b].real)
    return perm, sign


@lru_cache(maxsize=None)
def enumerate_clifford_group(n: int) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
    """All Clifford elements modulo phase for N <= 2 as ``(unitary, perm, sign)``.

    Breadth-first search over H, S and CNOT, keyed by the signed action on Paulis.
    """
    if n > 2:
        raise ValueError("explicit enumeration is limited to N <= 2")
    basis = pauli_basis(n)
    gens = _gate_unitaries(n)
    start = np.eye(1 << n, dtype=complex)
    perm, sign = signed_pauli_action(start, basis)
    seen = {(perm.tobytes(), sign.tobytes())}
    out = [(start, perm, sign)]
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for g in gens:
            w = g @ u
            perm, sign = signed_pauli_action(w, basis)
            key = (perm.tobytes(), sign.tobytes())
            if key not in seen:
                seen.add(key)
                out.append((w, perm, sign))
                queue.append(w)
    if len(out) != clifford_group_order(n):
        raise AssertionError(f"enumerated {len(out)} elements, expected {clifford_group_order(n)}")
    return tuple(out)


def symplectic_representatives(n: int):
    """One element per coset of the Pauli group (``|Sp(2N, 2)|`` elements)."""
    reps = {}
    for u, perm, sign in enumerate_clifford_group(n):
        key = perm.tobytes()
        if key not in reps:
            reps[key] = (u, perm, sign)
    return list(reps.values())


def pauli_class_key(u: np.ndarray, n: int) -> tuple:
    """Signed images of the generators ``X_q, Z_q``: identifies a Clifford modulo phase."""
    gens = [_basis_pauli(n, c).matrix() for c in range(2 * n)]
    basis = pauli_basis(n)
    stack = np.array(basis)
    key = []
    for p in gens:
        m = u @ p @ u.conj().T
        ov = np.einsum("bij,ji->b", stack, m) / (1 << n)
        b = int(np.argmax(np.abs(ov)))
        key.append((b, int(np.sign(ov[b].real))))
    return tuple(key)


__all__ = [
    "CliffordElement", "CliffordBatch", "sample_clifford", "sample_clifford_batch",
    "sample_symplectic_slots", "symplectic_product", "transvect", "apply_pauli",
    "apply_transvection", "is_symplectic", "symplectic_group_order", "clifford_group_order",
    "enumerate_clifford_group", "symplectic_representatives", "signed_pauli_action",
    "pauli_basis", "pauli_class_key", "slots_symplectic_images",
]
