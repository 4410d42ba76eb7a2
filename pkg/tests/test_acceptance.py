"""Acceptance suite: one test per acceptance criterion, at the stated tolerances.

Each test records a one-line verdict (printed in the terminal summary) before
asserting, so a failing criterion still reports its measured numbers.
"""

import math
import time
from fractions import Fraction

import numpy as np

from dopedclifford import closed_forms as cf
from dopedclifford.circuits import DopedCircuitSpec
from dopedclifford.engine import (build_xi_system, c_q_coefficients, expected_spectrum,
                                  fold_channel_doped, kernel_vectors, random_operator_traces,
                                  state_channel)
from dopedclifford.exact import rank
from dopedclifford.montecarlo import mc_otoc8, mc_purity_fluct, random_product_states
from dopedclifford.oracle import exact_group_channels
from dopedclifford.pauli import d_pm_lambda, trace_psi4_Q
from dopedclifford.s4 import SYM
from dopedclifford.weingarten import GroupMatrix, unitary_weingarten

T = math.pi / 4


def _oracle_deviation(n, ks, thetas, n_ops, rng):
    worst = 0.0
    for theta in thetas:
        system = build_xi_system(theta, n)
        for _ in range(n_ops):
            dim = 2 ** (4 * n)
            op = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            for k, ref in enumerate(exact_group_channels(n, max(ks), theta, op)):
                got = fold_channel_doped(op, k, theta, n, system=system).dense()
                worst = max(worst, float(np.max(np.abs(got - ref))))
    return worst


def test_criterion_1_channel_matches_enumeration(record):
    rng = np.random.default_rng(1)
    thetas = (math.pi / 4, math.pi / 3)
    t0 = time.time()
    dev1 = _oracle_deviation(1, range(4), thetas, 20, rng)
    t1 = time.time() - t0
    t0 = time.time()
    dev2 = _oracle_deviation(2, range(3), thetas, 20, rng)
    t2 = time.time() - t0
    ok = dev1 <= 1e-10 and t1 < 10 and dev2 <= 1e-9 and t2 < 600
    record(1, ok, f"N=1 dev {dev1:.1e} in {t1:.1f}s; N=2 dev {dev2:.1e} in {t2:.0f}s")
    assert dev1 <= 1e-10 and t1 < 10
    assert dev2 <= 1e-9 and t2 < 600


def test_criterion_2_xi_spectrum(record):
    t0 = time.time()
    worst_ev = worst_sym = 0.0
    ranks = set()
    for d in (4, 8, 16):
        for theta in (math.pi / 4, math.pi / 3, math.pi / 6):
            system = build_xi_system(theta, d.bit_length() - 1)
            xi = system.xi.array()
            nonzero = [float(x) for x in expected_spectrum(theta, d)]
            ref = np.sort(np.array(nonzero + [0.0] * 18))
            worst_ev = max(worst_ev, float(np.max(np.abs(np.linalg.eigvalsh(xi) - ref))))
            worst_sym = max(worst_sym, float(np.max(np.abs(xi - xi.T))))
            ranks.add(rank(system.xi.data) if system.kind == "exact" else int(np.linalg.matrix_rank(xi)))
    elapsed = time.time() - t0
    ok = worst_ev <= 1e-10 and worst_sym <= 1e-12 and ranks == {6} and elapsed < 1
    record(2, ok, f"eigenvalue dev {worst_ev:.1e}, asymmetry {worst_sym:.1e}, ranks {sorted(ranks)}, "
                  f"{elapsed:.2f}s")
    assert ok


def _convergence_checks(d, rng):
    system = build_xi_system(T, d.bit_length() - 1)
    one = GroupMatrix.identity("exact")
    resolvent = system.lam @ (one - system.xi).inverse()
    lhs = system.w_minus - resolvent @ system.w_minus
    haar_ok = lhs.equals(unitary_weingarten(d))
    zeta = (resolvent @ (system.w_plus + system.w_minus) - system.w_minus).array()
    kernel_dev = max(float(np.max(np.abs(zeta @ e.astype(float)))) for e in kernel_vectors())
    q_dev = 0.0
    for _ in range(20):
        qv, _ = random_operator_traces(d.bit_length() - 1, rng)
        q_dev = max(q_dev, float(np.max(np.abs(zeta @ qv))) / max(1.0, float(np.max(np.abs(qv)))))
    return haar_ok, kernel_dev, q_dev


def test_criterion_3_convergence_identities(record):
    rng = np.random.default_rng(3)
    parts, ok = [], True
    for d in (4, 8):
        haar_ok, kernel_dev, q_dev = _convergence_checks(d, rng)
        ok &= haar_ok and kernel_dev <= 1e-10 and q_dev <= 1e-10
        parts.append(f"d={d}: Haar identity {'exact' if haar_ok else 'violated'}, "
                     f"kernel {kernel_dev:.1e}, q-vectors {q_dev:.1e}")
    record(3, ok, "; ".join(parts))
    assert ok


def test_criterion_4_closed_form_web(record):
    failures = []
    for d in (4, 16, 64):
        checks = {
            "otoc k=0": cf.otoc8_doped(d, 0) == Fraction(d * d, d ** 4 - 5 * d * d + 4),
            "otoc k=inf": cf.otoc8_doped(d, math.inf)
            == Fraction(5 * d * d, (d * d - 1) * (d * d - 4) * (d * d - 9)),
            "purity k=0": cf.purity_fluct(d, 0) == Fraction((d - 1) ** 2, (d + 1) ** 2 * (d + 2)),
            "purity k=inf": cf.purity_fluct(d, math.inf)
            == Fraction(2 * (d - 1) ** 2, (d + 1) ** 2 * (d + 2) * (d + 3)),
            "second moment k=0": cf.purity_second_moment(d, 0) == Fraction(5 * d + 1, (d + 1) * (d + 2)),
        }
        failures += [f"{name} at d={d}" for name, good in checks.items() if not good]
    if c_q_coefficients(T, 4) != (3, 2):
        failures.append("c_q_coefficients(pi/4, 4)")
    d_plus, d_minus = d_pm_lambda(SYM, 2)
    for k, expected in ((0, (Fraction(1, 40), Fraction(1, 40))), (1, (Fraction(1, 75), Fraction(2, 75)))):
        a, b = state_channel("zero", k, T, 2)
        if (a, b) != expected or a * d_plus + b * (d_plus + d_minus) != 1:
            failures.append(f"state channel k={k}")
    record(4, not failures, "all exact equalities hold" if not failures else f"failed: {failures}")
    assert not failures


def test_criterion_5_otoc_monte_carlo(record):
    t0 = time.time()
    parts, ok = [], True
    for k in (0, 1, 2, 4):
        res = mc_otoc8(DopedCircuitSpec(4, k, seed=500 + k), samples=100_000)
        target = Fraction(256, 64260) if k == 0 else cf.otoc8_doped(16, k)
        z = res.z(target)
        z_trace = res.z(cf.otoc8_trace_doped(16, k))
        ok &= abs(z) <= 3
        parts.append(f"k={k}: {res.mean:+.5f}+-{res.stderr:.5f} z={z:+.2f} (trace form z={z_trace:+.2f})")
    elapsed = time.time() - t0
    ok &= elapsed < 300
    record(5, ok, "; ".join(parts) + f"; {elapsed:.0f}s")
    assert ok


def test_criterion_6_purity_monte_carlo(record):
    t0 = time.time()
    r0 = mc_purity_fluct(DopedCircuitSpec(4, 0, seed=600), 2, samples=1_000_000)
    r12 = mc_purity_fluct(DopedCircuitSpec(4, 12, seed=612), 2, samples=1_000_000)
    elapsed = time.time() - t0
    z0 = r0.z(0.04326)
    z12 = r12.z(4.553e-3)
    z12_exact = r12.z(cf.purity_fluct(16, 12))
    separation = abs(r0.mean - r12.mean) / math.hypot(r0.stderr, r12.stderr)
    ok = abs(z0) <= 3 and abs(z12) <= 3 and separation > 5 and elapsed < 600
    record(6, ok, f"k=0 {r0.mean:.5f}+-{r0.stderr:.5f} z={z0:+.2f}; k=12 {r12.mean:.6f}+-{r12.stderr:.6f} "
                  f"z vs Haar={z12:+.1f}, z vs exact k=12 value={z12_exact:+.2f}; "
                  f"separation {separation:.0f} sigma; {elapsed:.0f}s")
    assert abs(z0) <= 3
    assert separation > 5 and elapsed < 600
    assert abs(z12) <= 3


def test_criterion_7_threshold_scaling(record):
    parts, ok = [], True
    for probe in ("otoc8", "purity"):
        curve = cf.threshold_curve(range(4, 13), r=1, probe=probe)
        fit = cf.fit_affine([n for n, _, _ in curve], [k for _, _, k in curve])
        ok &= fit.max_residual <= 2 and fit.slope > 0
        parts.append(f"{probe}: k*={[k for _, _, k in curve]} slope {fit.slope:.2f} "
                     f"max residual {fit.max_residual:.2f}")
    record(7, ok, "; ".join(parts))
    assert ok


def test_criterion_8_placement_and_s_gate(record):
    failures = []
    for n in (2, 3, 4):
        base = build_xi_system(T, n, qubit=0)
        for q in range(1, n):
            other = build_xi_system(T, n, qubit=q)
            if not (other.xi.equals(base.xi) and other.lam.equals(base.lam)):
                failures.append(f"placement N={n} q={q}")
    s_gate = math.pi / 2
    for k in (1, 3, 8):
        for d in (4, 16, 64):
            if cf.purity_fluct(d, k, s_gate) != cf.purity_fluct(d, 0):
                failures.append(f"purity fluct d={d} k={k}")
            if cf.purity_second_moment(d, k, s_gate) != cf.purity_second_moment(d, 0):
                failures.append(f"second moment d={d} k={k}")
        if state_channel("zero", k, s_gate, 3) != state_channel("zero", 0, s_gate, 3):
            failures.append(f"state channel k={k}")
        if cf.otoc8_via_channel(4, k, s_gate) != cf.otoc8_via_channel(4, 0):
            failures.append(f"otoc channel k={k}")
    mc_p = mc_purity_fluct(DopedCircuitSpec(4, 4, theta=s_gate, seed=800), 2, samples=100_000)
    mc_o = mc_otoc8(DopedCircuitSpec(4, 2, theta=s_gate, seed=801), samples=20_000)
    zp = mc_p.z(cf.purity_fluct(16, 0))
    zo = mc_o.z(cf.otoc8_via_channel(4, 0))
    if abs(zp) > 3:
        failures.append(f"MC purity z={zp:.2f}")
    if abs(zo) > 3:
        failures.append(f"MC otoc z={zo:.2f}")
    record(8, not failures, f"exact checks hold; MC purity z={zp:+.2f}, MC otoc z={zo:+.2f}"
           if not failures else f"failed: {failures}")
    assert not failures


def test_criterion_9_trq_values(record):
    zero_ok = all(trace_psi4_Q(("zero", n)) == Fraction(1, 2 ** n) for n in range(1, 7))
    dense_ok = True
    for n in range(1, 7):
        psi = np.zeros(2 ** n)
        psi[0] = 1
        dense_ok &= abs(trace_psi4_Q(psi) - 2.0 ** -n) < 1e-12
    rng = np.random.default_rng(9)
    vals = np.array([trace_psi4_Q([q for q in random_product_states(1, 2, rng)]) for _ in range(10_000)])
    mean, stderr = vals.mean(), vals.std(ddof=1) / math.sqrt(len(vals))
    z = (mean - 4 / 25) / stderr
    ok = zero_ok and dense_ok and abs(z) <= 3
    record(9, ok, f"|0..0> gives 1/d for N<=6; random product mean {mean:.5f}+-{stderr:.5f} "
                  f"vs 4/25 (z={z:+.2f})")
    assert ok
