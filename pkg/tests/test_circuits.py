import math

import numpy as np
import pytest

from dopedclifford.circuits import (DopedCircuit, DopedCircuitSpec, StateVector, apply_to_state,
                                    build_doped_circuit, dense_unitary, sample_doped_batch)


def _equal_up_to_phase(a, b):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[idx] / b[idx]
    return np.isclose(abs(phase), 1) and np.allclose(a, phase * b, atol=1e-10)


@pytest.mark.parametrize("kwargs", [dict(n_qubits=0, k=1), dict(n_qubits=2, k=-1), dict(n_qubits=2, k=1, theta=7.0),
                                    dict(n_qubits=2, k=1, placement="left"), dict(n_qubits=2, k=1, qubit=2)])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        DopedCircuitSpec(**kwargs)


def test_circuit_structure_and_determinism():
    spec = DopedCircuitSpec(3, 4, seed=7)
    c1, c2 = build_doped_circuit(spec), build_doped_circuit(spec)
    assert c1.k == 4
    assert [g[0] for g in c1.gates] == ["clifford"] + ["phase", "clifford"] * 4
    assert np.allclose(dense_unitary(c1), dense_unitary(c2))


def test_fixed_placement():
    spec = DopedCircuitSpec(3, 5, placement="fixed", qubit=2)
    assert all(g[1] == 2 for g in build_doped_circuit(spec).gates if g[0] == "phase")


def test_batch_unitaries_match_explicit_circuits():
    spec = DopedCircuitSpec(3, 2, theta=math.pi / 3)
    batch = sample_doped_batch(spec, 5, np.random.default_rng(3))
    us = batch.unitaries()
    for i in range(5):
        u = dense_unitary(batch.circuit(i))
        assert np.allclose(u @ u.conj().T, np.eye(8), atol=1e-12)
        assert _equal_up_to_phase(us[i], u)


def test_elementary_gates():
    bell = DopedCircuit(2, (("h", 0), ("cnot", 0, 1))).apply(np.array([1, 0, 0, 0]))
    assert np.allclose(bell, np.array([1, 0, 0, 1]) / np.sqrt(2))
    s = DopedCircuit(1, (("s", 0),)).apply(np.array([0, 1]))
    assert np.allclose(s, [0, 1j])
    p = DopedCircuit(1, (("phase", 0, math.pi / 4),)).apply(np.array([0, 1]))
    assert np.allclose(p, [0, np.exp(1j * math.pi / 4)])
    with pytest.raises(ValueError):
        DopedCircuit(1, (("t", 0),)).apply(np.array([1, 0]))


def test_state_evolution_keeps_norm():
    spec = DopedCircuitSpec(5, 3, seed=2)
    out = apply_to_state(build_doped_circuit(spec), StateVector.zero(5))
    assert out.norm == pytest.approx(1, abs=1e-10)


def test_state_vector_validation():
    with pytest.raises(ValueError):
        StateVector(np.ones(3))
    with pytest.raises(ValueError):
        apply_to_state(build_doped_circuit(DopedCircuitSpec(2, 0)), StateVector.zero(3))


def test_dense_limit():
    with pytest.raises(ValueError):
        dense_unitary(build_doped_circuit(DopedCircuitSpec(7, 0)))
