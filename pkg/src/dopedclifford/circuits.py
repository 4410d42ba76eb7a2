"""Doped Clifford circuits ``U = C_k K C_{k-1} ... K C_0`` and their simulation.

A circuit alternates ``k + 1`` independent uniform Clifford layers with ``k``
single-qubit phase gates ``P_theta = diag(1, e^{i theta})``.  Two
representations are provided: :class:`DopedCircuit`, an explicit gate
sequence for a single sample, and :class:`DopedCircuitBatch`, which applies
many independent samples at once to batched states or matrices.

Qubit 0 is the most significant bit of the computational-basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordBatch, CliffordElement, sample_clifford, sample_clifford_batch

DENSE_MAX_QUBITS = 6
STATE_MAX_QUBITS = 24
NORM_TOL = 1e-10

PLACEMENTS = ("uniform", "fixed")


@dataclass(frozen=True)
class DopedCircuitSpec:
    """Parameters of a doped-circuit ensemble.

    ``placement`` is ``"uniform"`` (each phase gate on a uniformly random
    qubit) or ``"fixed"`` (always on ``qubit``).
    """

    n_qubits: int
    k: int
    theta: float = math.pi / 4
    seed: int = 0
    placement: str = "uniform"
    qubit: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a non-negative integer, got {self.k}")
        if not 0 <= self.theta < 2 * math.pi:
            raise ValueError(f"theta must lie in [0, 2 pi), got {self.theta}")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if not 0 <= self.qubit < self.n_qubits:
            raise ValueError(f"qubit {self.qubit} out of range")

    @property
    def d(self) -> int:
        return 2 ** self.n_qubits

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def _draw_qubits(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.placement == "fixed":
            return np.full(size, self.qubit, dtype=np.int64)
        return rng.integers(0, self.n_qubits, size=size, dtype=np.int64)


# ------------------------------------------------------------------ gates

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])


def _apply_1q(state: np.ndarray, gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply a 2x2 gate to ``qubit`` of ``state`` with shape ``(d,)`` or ``(d, m)``."""
    shape = state.shape
    t = state.reshape((2 ** qubit, 2, 2 ** (n - qubit - 1)) + shape[1:])
    t = np.tensordot(gate, t, axes=([1], [1]))
    return np.moveaxis(t, 0, 1).reshape(shape)


def _apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    cbit = (idx >> (n - 1 - control)) & 1
    perm = idx ^ (cbit << (n - 1 - target))
    return state[perm]


def phase_mask(n: int, qubits: np.ndarray) -> np.ndarray:
    """``mask[b, x] = 1`` when qubit ``qubits[b]`` of basis index ``x`` is set."""
    idx = np.arange(2 ** n, dtype=np.int64)
    return ((idx[None, :] >> (n - 1 - np.asarray(qubits)[:, None])) & 1).astype(bool)


@dataclass(frozen=True)
class DopedCircuit:
    """Explicit gate sequence, applied left to right.

    Gates are ``("clifford", CliffordElement)``, ``("phase", qubit, theta)``,
    ``("h", qubit)``, ``("s", qubit)`` or ``("cnot", control, target)``.
    """

    n_qubits: int
    gates: tuple = ()

    @property
    def k(self) -> int:
        return sum(1 for g in self.gates if g[0] == "phase")

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Act on a vector ``(d,)`` or on the columns of a ``(d, m)`` matrix."""
        n = self.n_qubits
        out = np.asarray(state, dtype=complex)
        if out.shape[0] != 2 ** n:
            raise ValueError("state dimension does not match the circuit")
        for g in self.gates:
            kind = g[0]
            if kind == "clifford":
                out = g[1].apply(out)
            elif kind == "phase":
                _, q, theta = g
                out = _apply_1q(out, np.diag([1, np.exp(1j * theta)]), q, n)
            elif kind == "h":
                out = _apply_1q(out, _H, g[1], n)
            elif kind == "s":
                out = _apply_1q(out, _S, g[1], n)
            elif kind == "cnot":
                out = _apply_cnot(out, g[1], g[2], n)
            else:
                raise ValueError(f"unknown gate {kind!r}")
        return out


def build_doped_circuit(spec: DopedCircuitSpec, rng: np.random.Generator | None = None) -> DopedCircuit:
    """One sample ``C_0, K, C_1, ..., K, C_k`` in application order."""
    rng = spec.rng() if rng is None else rng
    gates = [("clifford", sample_clifford(spec.n_qubits, rng))]
    for q in spec._draw_qubits(spec.k, rng):
        gates.append(("phase", int(q), spec.theta))
        gates.append(("clifford", sample_clifford(spec.n_qubits, rng)))
    return DopedCircuit(spec.n_qubits, tuple(gates))


def dense_unitary(circuit: DopedCircuit) -> np.ndarray:
    """The ``d x d`` unitary of ``circuit`` (N <= 6)."""
    n = circuit.n_qubits
    if n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense unitary limited to N <= {DENSE_MAX_QUBITS}, got N={n}")
    return circuit.apply(np.eye(2 ** n, dtype=complex))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        n = amp.size.bit_length() - 1
        if amp.ndim != 1 or 2 ** n != amp.size:
            raise ValueError("amplitudes must be a vector of length 2^N")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amp = np.zeros(2 ** n, dtype=complex)
        amp[0] = 1
        return cls(amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def apply_to_state(circuit: DopedCircuit, state: StateVector) -> StateVector:
    """Evolve ``state``, checking the norm after every gate."""
    n = circuit.n_qubits
    if n > STATE_MAX_QUBITS:
        raise ValueError(f"state simulation limited to N <= {STATE_MAX_QUBITS}")
    if state.n_qubits != n:
        raise ValueError("state and circuit sizes differ")
    amp = state.amplitudes
    for g in circuit.gates:
        amp = DopedCircuit(n, (g,)).apply(amp)
        if abs(np.linalg.norm(amp) - 1) > NORM_TOL:
            raise ArithmeticError(f"norm drift after gate {g[0]}")
    return StateVector(amp)


# ---------------------------------------------------------------- batches

@dataclass(frozen=True, eq=False)
class DopedCircuitBatch:
    """``size`` independent samples of a doped circuit, stored layer by layer."""

    spec: DopedCircuitSpec
    layers: tuple
    qubits: np.ndarray  # (k, size)

    def __len__(self):
        return len(self.layers[0])

    def apply(self, states: np.ndarray) -> np.ndarray:
        """Act on batched states ``(B, d)`` or matrices ``(B, d, m)`` (modulo a global phase per sample)."""
        n, theta = self.spec.n_qubits, self.spec.theta
        out = self.layers[0].apply(states)
        phase = np.exp(1j * theta)
        for j, layer in enumerate(self.layers[1:]):
            mask = phase_mask(n, self.qubits[j])
            factor = np.where(mask, phase, 1.0)
            out = out * (factor if out.ndim == 2 else factor[:, :, None])
            out = layer.apply(out)
        return out

    def unitaries(self) -> np.ndarray:
        n = self.spec.n_qubits
        if n > DENSE_MAX_QUBITS:
            raise ValueError(f"dense unitaries limited to N <= {DENSE_MAX_QUBITS}")
        eye = np.broadcast_to(np.eye(2 ** n, dtype=complex), (len(self), 2 ** n, 2 ** n)).copy()
        return self.apply(eye)

    def circuit(self, i: int) -> DopedCircuit:
        gates = [("clifford", self.layers[0].element(i))]
        for j, layer in enumerate(self.layers[1:]):
            gates.append(("phase", int(self.qubits[j, i]), self.spec.theta))
            gates.append(("clifford", layer.element(i)))
        return DopedCircuit(self.spec.n_qubits, tuple(gates))


def sample_doped_batch(spec: DopedCircuitSpec, size: int, rng: np.random.Generator) -> DopedCircuitBatch:
    """Draw ``size`` circuits: all Clifford layers first, then the phase-gate qubits."""
    if size < 1:
        raise ValueError("batch size must be positive")
    layers = tuple(sample_clifford_batch(spec.n_qubits, size, rng) for _ in range(spec.k + 1))
    qubits = spec._draw_qubits((spec.k, size), rng)
    return DopedCircuitBatch(spec, layers, qubits)


__all__ = [
    "DopedCircuitSpec", "DopedCircuit", "DopedCircuitBatch", "StateVector",
    "build_doped_circuit", "sample_doped_batch", "dense_unitary", "apply_to_state", "phase_mask",
    "CliffordBatch", "CliffordElement",
]
