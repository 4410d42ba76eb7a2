from fractions import Fraction

import numpy as np
import pytest

from dopedclifford.pauli import (PauliString, all_pauli_strings, d_pm_lambda, dense_q, operator_traces,
                                 pauli4_traces, pauli_commutation_sign, q2_operator, q_value, trace_psi4_Q,
                                 trace_q_T)
from dopedclifford.s4 import IDENTITY, IRREPS, PERMS, SYM, Perm4, perm_operator


def test_q_table_values():
    expected = {(1, 1, 1, 1): 4, (2, 1, 1): 2, (2, 2): 4, (3, 1): 1, (4,): 2}
    for p in PERMS:
        assert q_value(p) == expected[p.cycle_type]
        assert np.isclose(np.trace(q2_operator() @ perm_operator(p, 2)), expected[p.cycle_type])


def test_q2_is_projector_commuting_with_permutations():
    q = q2_operator()
    assert np.allclose(q @ q, q)
    for p in PERMS:
        t = perm_operator(p, 2)
        assert np.allclose(q @ t, t @ q)


def test_trace_q_T_examples():
    assert trace_q_T(IDENTITY, 2) == 16
    assert trace_q_T(Perm4.from_cycles((1, 2, 3)), 5) == 1
    assert trace_q_T(Perm4.from_cycles((1, 2), (3, 4)), 2) == 16


def test_trace_q_T_matches_dense_q():
    q = dense_q(2)
    for p in PERMS[::3]:
        assert np.isclose(np.trace(q @ perm_operator(p, 4)), trace_q_T(p, 2))


def test_d_pm_for_symmetric_irrep():
    assert d_pm_lambda(SYM, 2) == (5, 30)
    for n in (1, 2, 3, 4):
        d = 2 ** n
        plus, _ = d_pm_lambda(SYM, n)
        assert 6 * plus == (d + 1) * (d + 2)
        assert sum(sum(d_pm_lambda(lam, n)) for lam in IRREPS) == d ** 4


def test_pauli_products_and_signs():
    x, z = PauliString("X"), PauliString("Z")
    assert np.allclose((x * z).matrix(), x.matrix() @ z.matrix())
    assert pauli_commutation_sign(PauliString("XZ"), PauliString("ZX")) == 1
    assert pauli_commutation_sign(x, z) == -1
    assert PauliString.single(3, 1, "Y").support == frozenset({1})


def test_all_pauli_strings_count():
    assert len(all_pauli_strings(2)) == 16


def test_operator_traces_match_dense_contraction(rng):
    op = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    qv, tv = operator_traces(op, 1)
    q = dense_q(1)
    for i, p in enumerate(PERMS):
        t = perm_operator(p, 2)
        assert np.isclose(qv[i], np.trace(op @ q @ t))
        assert np.isclose(tv[i], np.trace(op @ t))


def test_pauli4_traces_match_dense():
    ps = (PauliString("XI"), PauliString("ZY"), PauliString("XI"), PauliString("ZY"))
    qv, tv = pauli4_traces(ps)
    m = ps[0].matrix()
    for p in ps[1:]:
        m = np.kron(m, p.matrix())
    dq, dt = operator_traces(m, 2)
    assert np.allclose(np.array(qv, dtype=complex), dq)
    assert np.allclose(np.array(tv, dtype=complex), dt)


def test_trace_psi4_Q_values():
    assert trace_psi4_Q(("zero", 3)) == Fraction(1, 8)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.isclose(trace_psi4_Q([plus]), 0.5)
    assert np.isclose(trace_psi4_Q(np.kron(plus, plus)), 0.25)
    with pytest.raises(ValueError):
        trace_psi4_Q(np.array([1.0, 1.0]))
