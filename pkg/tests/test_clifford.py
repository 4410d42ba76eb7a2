import numpy as np
import pytest
from scipy.stats import chi2

from dopedclifford.clifford import (clifford_group_order, enumerate_clifford_group, is_symplectic,
                                    pauli_class_key, sample_clifford, sample_clifford_batch,
                                    symplectic_group_order)
from dopedclifford.montecarlo import chi_square_uniformity, clifford_class_counts
from dopedclifford.pauli import all_pauli_strings


def test_group_orders():
    assert symplectic_group_order(1) == 6
    assert clifford_group_order(1) == 24
    assert clifford_group_order(2) == 11520


def test_enumeration_sizes():
    assert len(enumerate_clifford_group(1)) == 24


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sampled_elements_are_unitary_cliffords(n, rng):
    for _ in range(5):
        c = sample_clifford(n, rng)
        u = c.unitary()
        assert np.allclose(u @ u.conj().T, np.eye(2 ** n), atol=1e-12)
        assert is_symplectic(c.symplectic())
        for p in all_pauli_strings(n)[1:6]:
            img = u @ p.matrix() @ u.conj().T
            overlaps = [abs(np.trace(q.matrix() @ img)) / 2 ** n for q in all_pauli_strings(n)]
            assert np.isclose(max(overlaps), 1)


def test_tableau_phases_are_bits(rng):
    sym, phases = sample_clifford(2, rng).tableau()
    assert sym.shape == (4, 4) and set(phases) <= {0, 1}


def test_batch_matches_elements(rng):
    batch = sample_clifford_batch(3, 4, rng)
    states = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
    out = batch.apply(states)
    for i in range(4):
        assert np.allclose(out[i], batch.element(i).apply(states[i]))


def test_uniform_over_single_qubit_group():
    counts = clifford_class_counts(1, 24_000, np.random.default_rng(2))
    assert len(counts) == 24
    sigma = np.sqrt(24_000 * (1 / 24) * (23 / 24))
    assert all(abs(c - 1000) <= 5 * sigma for c in counts.values())
    stat, p = chi_square_uniformity(counts, 24)
    assert p > 1e-4 and stat == pytest.approx(chi2.isf(p, 23))


def test_two_qubit_sampler_is_a_two_design(rng):
    # second moment twirl of |00><00| must equal (1 + SWAP)/(d(d+1))
    batch = sample_clifford_batch(2, 40_000, rng)
    states = np.zeros((40_000, 4), dtype=complex)
    states[:, 0] = 1
    psi = batch.apply(states)
    pairs = np.einsum("bi,bj->bij", psi, psi).reshape(len(psi), 16)
    second = np.einsum("bi,bj->ij", pairs, pairs.conj()) / len(psi)
    swap = np.eye(16)[[4 * (i % 4) + i // 4 for i in range(16)]]
    assert np.allclose(second, (np.eye(16) + swap) / 20, atol=0.01)


def test_class_key_distinguishes_paulis():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    assert pauli_class_key(np.eye(2), 1) != pauli_class_key(x, 1)
