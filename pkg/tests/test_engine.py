import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import unitary_group

from dopedclifford.engine import (build_xi_system, c_q_coefficients, c_q_coefficients_bruteforce,
                                  expected_spectrum, f_pm_theta, fold_channel_doped, fold_channel_haar,
                                  gamma_k, haar_limit_coefficients, state_channel, state_channel_closed,
                                  xi_power)
from dopedclifford.oracle import exact_group_channel
from dopedclifford.pauli import d_pm_lambda, dense_q, q_value
from dopedclifford.s4 import PERMS, SYM, compose, perm_operator

T = math.pi / 4


def test_rates_at_d4_and_d16():
    assert f_pm_theta(T, 4) == (Fraction(14, 15), Fraction(8, 15))
    assert f_pm_theta(T, 16)[1] == Fraction(179, 255)


def test_spectrum_at_d4():
    ev = build_xi_system(T, 2).eigenvalues()
    ref = sorted([14 / 15, 8 / 15] + [11 / 15] * 4 + [0.0] * 18, reverse=True)
    assert np.allclose(ev, ref, atol=1e-12)


def test_spectrum_for_random_angles():
    rng = np.random.default_rng(11)
    for _ in range(10):
        theta = float(rng.uniform(0.05, math.pi / 2 - 0.05))
        n = int(rng.integers(2, 7))
        ev = np.sort(build_xi_system(theta, n).eigenvalues())
        nonzero = [float(x) for x in expected_spectrum(theta, 2 ** n)]
        assert np.allclose(ev, np.sort(nonzero + [0.0] * 18), atol=1e-10)


def test_spectrum_lemma_does_not_cover_one_qubit():
    # at d = 2 the formula gives f+ > 1 while Xi keeps only five nonzero modes
    fp, _ = f_pm_theta(0.3, 2)
    assert fp > 1
    assert np.count_nonzero(np.abs(build_xi_system(0.3, 1).eigenvalues()) > 1e-12) == 5


def test_geometric_sum_decays_at_rate_f_plus():
    system = build_xi_system(T, 2)
    limit = gamma_k(system, math.inf)
    dev = {k: gamma_k(system, k).max_abs_diff(limit) for k in (50, 100)}
    assert dev[100] / dev[50] == pytest.approx((14 / 15) ** 50, rel=1e-4)
    assert dev[100] < 1e-4


@pytest.mark.xfail(strict=True, reason="the k=50 gap is about 1.3e-3 because f+ = 14/15 at d=4")
def test_geometric_sum_within_1e8_at_k50():
    system = build_xi_system(T, 2)
    assert gamma_k(system, 50).max_abs_diff(gamma_k(system, math.inf)) < 1e-8


def test_xi_power_exact_and_float_agree():
    system = build_xi_system(T, 3)
    assert xi_power(system, 70).max_abs_diff(xi_power(system, 10).power(7)) < 1e-12


def test_clifford_gate_has_no_haar_limit():
    system = build_xi_system(math.pi / 2, 2)
    assert system.is_clifford_gate
    with pytest.raises(ValueError):
        gamma_k(system, math.inf)


@pytest.mark.parametrize("theta", [T, math.pi / 3, 0.4])
def test_channel_matches_enumeration_n1(theta, rng):
    op = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    for k in range(4):
        got = fold_channel_doped(op, k, theta, 1).dense()
        assert np.allclose(got, exact_group_channel(1, k, theta, op), atol=1e-10)


def test_general_single_qubit_gate_n1(rng):
    k_gate = unitary_group.rvs(2, random_state=7)
    op = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    for k in range(3):
        got = fold_channel_doped(op, k, None, 1, k_gate=k_gate).dense()
        assert np.allclose(got, exact_group_channel(1, k, None, op, k_gate=k_gate), atol=1e-10)


def test_channel_preserves_trace(rng):
    op = rng.normal(size=(256, 256))
    for k in (0, 1, 5):
        ch = fold_channel_doped(op, k, T, 2)
        assert np.isclose(complex(ch.total_trace()), np.trace(op))


def test_haar_limit_matches_haar_channel_exactly():
    from dopedclifford.pauli import PauliString, pauli4_traces

    ps = (PauliString("XIZ"), PauliString("IYZ"), PauliString("XIZ"), PauliString("IYZ"))
    traces = pauli4_traces(ps)
    lim = haar_limit_coefficients(traces, T, 3)
    haar = fold_channel_haar(traces, 3)
    assert all(x == 0 for x in lim.gamma)
    assert all(a == b for a, b in zip(lim.beta, haar.beta))


def test_haar_channel_against_sampled_unitaries():
    rng = np.random.default_rng(5)
    mats = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(4)]
    op = mats[0]
    for m in mats[1:]:
        op = np.kron(op, m)
    haar = fold_channel_haar(op, 2)
    predicted = np.array([complex(haar.trace_with(*_q_sigma_weights(s))) for s in PERMS])
    # tr(X Q T_s) = sum_ij X_ij (Q T_s)_ji
    q = dense_q(2)
    probes = np.stack([(q @ perm_operator(s, 4)).T.ravel() for s in PERMS], axis=1)
    us = unitary_group.rvs(4, size=3000, random_state=6)
    samples = []
    for chunk in np.array_split(us, 30):
        ev = [np.einsum("bij,jk,blk->bil", chunk, m, chunk.conj()) for m in mats]
        out = np.einsum("bij,bkl,bmn,bpq->bikmpjlnq", *ev).reshape(len(chunk), -1)
        samples.append(out @ probes)
    samples = np.concatenate(samples)
    mean = samples.mean(axis=0)
    scale = np.sqrt(len(samples))
    err_re = samples.real.std(axis=0, ddof=1) / scale
    err_im = samples.imag.std(axis=0, ddof=1) / scale
    assert np.all(np.abs(mean.real - predicted.real) <= 4 * err_re)
    assert np.all(np.abs(mean.imag - predicted.imag) <= 4 * err_im)


def _q_sigma_weights(sigma):
    # tr(Q T_sigma Q T_s) = tr(Q T_sigma T_s) = q(sigma s)^2 at N = 2
    w = [Fraction(q_value(compose(sigma, s)) ** 2) for s in PERMS]
    return w, w


def test_placement_does_not_change_xi():
    base = build_xi_system(T, 3, qubit=0)
    assert all(build_xi_system(T, 3, qubit=q).xi.equals(base.xi) for q in (1, 2))


def test_c_q_coefficients():
    assert c_q_coefficients(T, 4) == (3, 2)
    assert c_q_coefficients(math.pi / 2, 8)[1] == 0
    assert c_q_coefficients(0.0, 8)[0] == d_pm_lambda(SYM, 3)[0]
    for n in (2, 3, 4):
        assert c_q_coefficients_bruteforce(build_xi_system(T, n)) == c_q_coefficients(T, 2 ** n)


def test_state_channel_values_and_normalisation():
    assert state_channel("zero", 0, T, 2) == (Fraction(1, 40), Fraction(1, 40))
    assert state_channel("zero", 1, T, 2) == (Fraction(1, 75), Fraction(2, 75))
    assert state_channel("zero", math.inf, T, 2) == (0, Fraction(1, 35))
    for n in (2, 3, 5):
        plus, minus = d_pm_lambda(SYM, n)
        for k in (0, 2, 7):
            a, b = state_channel("random-product", k, T, n)
            assert a * plus + b * (plus + minus) == 1
            assert (a, b) == state_channel_closed(Fraction(2, 5) ** n, k, T, 2 ** n)


def test_state_channel_matches_dense_channel():
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1
    psi4 = np.kron(np.kron(psi, psi), np.kron(psi, psi))
    op = np.outer(psi4, psi4.conj())
    ch = fold_channel_doped(op, 2, T, 2)
    a, b = state_channel("zero", 2, T, 2)
    # Pi_sym = sum_s T_s / 24
    assert np.allclose(ch.gamma.astype(complex), float(a) / 24, atol=1e-12)
    assert np.allclose(ch.beta.astype(complex), float(b) / 24, atol=1e-12)


def test_negative_k_rejected():
    with pytest.raises(ValueError):
        fold_channel_doped(np.eye(16), -1, T, 1)
