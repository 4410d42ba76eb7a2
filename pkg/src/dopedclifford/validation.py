"""Invariant suites behind ``dopedclifford validate``.

``fast`` covers the algebraic identities and the N = 1 enumeration oracle;
``full`` adds the N = 2 oracle (11520 group elements) and small Monte-Carlo
runs.  Each check reports ``name``, ``passed``, ``detail`` and ``seconds``.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from . import closed_forms as cf
from .engine import (build_xi_system, expected_spectrum, fold_channel_doped,
                     random_operator_traces, state_channel, verify_convergence_structure)
from .pauli import operator_traces, trace_psi4_Q
from .weingarten import clifford_weingarten_pm, gram_inverse_oracle, unitary_weingarten

THETAS = (math.pi / 4, math.pi / 3, math.pi / 6)


def _check(name, fn):
    start = time.time()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing check is a failed check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return {"name": name, "passed": bool(passed), "detail": detail, "seconds": time.time() - start}


def check_weingarten():
    devs = {d: unitary_weingarten(d).max_abs_diff(gram_inverse_oracle(d)) for d in (4, 5, 8)}
    return all(v == 0 for v in devs.values()), f"max |W - G^-1| per d: {devs}"


def check_clifford_weingarten_rows():
    from .pauli import d_pm_lambda
    from .s4 import SYM

    ok = True
    for n in (2, 3, 4):
        wp, wm = clifford_weingarten_pm(2 ** n)
        dp, dm = d_pm_lambda(SYM, n)
        ok &= all(x == Fraction(1, 24 * dp) for x in wp.row_sums())
        ok &= all(x == Fraction(1, 24 * dm) for x in wm.row_sums())
    return ok, "row sums of W+- equal 1/(24 D+-_sym) for N = 2, 3, 4"


def check_xi_spectrum():
    worst = 0.0
    for d in (4, 8, 16):
        for theta in THETAS:
            sys = build_xi_system(theta, d.bit_length() - 1)
            ev = np.sort(sys.eigenvalues())
            nonzero = [float(x) for x in expected_spectrum(theta, d)]
            ref = np.sort(np.array(nonzero + [0.0] * (24 - len(nonzero))))
            worst = max(worst, float(np.max(np.abs(ev - ref))))
    return worst <= 1e-10, f"max eigenvalue deviation {worst:.2e} (6 nonzero, 18 zero)"


def check_channel_oracle(n: int, ks, n_ops: int, seed: int):
    from .oracle import exact_group_channel

    rng = np.random.default_rng(seed)
    d4 = 2 ** (4 * n)
    worst = 0.0
    for theta in (math.pi / 4, math.pi / 3):
        sys = build_xi_system(theta, n)
        for _ in range(n_ops):
            op = rng.normal(size=(d4, d4)) + 1j * rng.normal(size=(d4, d4))
            tr = operator_traces(op, n)
            for k in ks:
                got = fold_channel_doped(tr, k, theta, n, system=sys).dense()
                ref = exact_group_channel(n, k, theta, op)
                worst = max(worst, float(np.max(np.abs(got - ref))))
    tol = 1e-10 if n == 1 else 1e-9
    return worst <= tol, f"N={n}, k in {list(ks)}: max entry deviation {worst:.2e}"


def check_convergence(d: int):
    rep = verify_convergence_structure(math.pi / 4, d, n_random=5)
    parts = {k: v["passed"] for k, v in rep.items() if isinstance(v, dict)}
    return rep["passed"], f"d={d}: {parts}"


def check_operator_haar_limit():
    rep = verify_convergence_structure(math.pi / 4, 4, n_random=3)
    lim = rep["haar_limit_k"]
    return lim["passed"], f"d=4: doped channel at k={lim['k']} vs Haar twirl, deviation {lim['max_dev']:.1e}"


def check_closed_form_web():
    ok = True
    for d in (4, 16, 64):
        ok &= cf.otoc8_doped(d, 0) == Fraction(d * d, d ** 4 - 5 * d * d + 4)
        ok &= cf.otoc8_doped(d, math.inf) == Fraction(5 * d * d, (d * d - 1) * (d * d - 4) * (d * d - 9))
        ok &= cf.purity_fluct(d, 0) == Fraction((d - 1) ** 2, (d + 1) ** 2 * (d + 2))
        ok &= cf.purity_fluct(d, math.inf) == Fraction(2 * (d - 1) ** 2, (d + 1) ** 2 * (d + 2) * (d + 3))
        ok &= cf.purity_second_moment(d, 0) == Fraction(5 * d + 1, (d + 1) * (d + 2))
    ok &= state_channel("zero", 0, math.pi / 4, 2) == (Fraction(1, 40), Fraction(1, 40))
    ok &= state_channel("zero", 1, math.pi / 4, 2) == (Fraction(1, 75), Fraction(2, 75))
    return ok, "exact identities at d = 4, 16, 64 and the N=2 state channel"


def check_otoc_trace_form():
    ok = all(cf.otoc8_via_channel(4, k) == cf.otoc8_trace_doped(16, k) for k in range(4))
    ok &= cf.otoc8_via_channel(5, math.inf) == cf.otoc8_trace_haar(32)
    return ok, "channel contraction of the 8-point trace equals its closed form (d=16, k<=3; d=32 Haar)"


def check_purity_contraction():
    ok = True
    for n in (2, 4, 6):
        h = n // 2
        for k in (0, 1, 3):
            ok &= cf.purity_fluct_exact(h, h, k, math.pi / 4, Fraction(1, 2 ** n)) == cf.purity_fluct(2 ** n, k)
    ok &= all(cf.purity_fluct_exact(na, 8 - na, 2, math.pi / 4, Fraction(2, 5) ** 8)
              == cf.purity_fluct_asymmetric(256, 2 ** na, 2, math.pi / 4, Fraction(2, 5) ** 8) for na in (1, 2, 3))
    return ok, "exact contraction agrees with the fluctuation closed forms"


def check_trq_zero():
    ok = all(trace_psi4_Q(("zero", n)) == Fraction(1, 2 ** n) for n in range(1, 7))
    return ok, "tr(Q |0><0|^4) = 1/d for N = 1..6"


def check_mc_purity(seed: int):
    from .circuits import DopedCircuitSpec
    from .montecarlo import mc_purity_fluct

    res = mc_purity_fluct(DopedCircuitSpec(4, 0, seed=seed), 2, samples=100_000)
    target = cf.purity_fluct(16, 0)
    return res.within(target, 4), f"N=4 k=0 variance {res.mean:.5f} +- {res.stderr:.5f} vs {float(target):.5f}"


def check_mc_otoc(seed: int):
    from .circuits import DopedCircuitSpec
    from .montecarlo import mc_otoc8

    res = mc_otoc8(DopedCircuitSpec(4, 1, seed=seed), samples=20_000)
    target = cf.otoc8_trace_doped(16, 1)
    return res.within(target, 4), f"N=4 k=1 OTOC {res.mean:.5f} +- {res.stderr:.5f} vs trace form {float(target):.5f}"


def check_sampler_uniformity(seed: int):
    from .montecarlo import chi_square_uniformity, clifford_class_counts

    counts = clifford_class_counts(1, 24_000, np.random.default_rng(seed))
    stat, p = chi_square_uniformity(counts, 24)
    return len(counts) == 24 and p > 1e-4, f"N=1: {len(counts)} classes, chi2={stat:.1f}, p={p:.3f}"


def run_validation(level: str = "fast", seed: int = 0) -> dict:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown validation level {level!r}")
    checks = [
        ("weingarten_gram_inverse", check_weingarten),
        ("clifford_weingarten_row_sums", check_clifford_weingarten_rows),
        ("xi_spectrum", check_xi_spectrum),
        ("channel_vs_enumeration_n1", lambda: check_channel_oracle(1, range(4), 3, seed)),
        ("convergence_identities_d8", lambda: check_convergence(8)),
        ("closed_form_web", check_closed_form_web),
        ("otoc_trace_form", check_otoc_trace_form),
        ("purity_contraction", check_purity_contraction),
        ("trq_zero_state", check_trq_zero),
        ("sampler_uniformity_n1", lambda: check_sampler_uniformity(seed)),
    ]
    if level == "full":
        checks += [
            ("channel_vs_enumeration_n2", lambda: check_channel_oracle(2, range(3), 2, seed)),
            ("operator_haar_limit_d4", check_operator_haar_limit),
            ("mc_purity_k0", lambda: check_mc_purity(seed)),
            ("mc_otoc_k1", lambda: check_mc_otoc(seed)),
        ]
    results = [_check(name, fn) for name, fn in checks]
    return {"level": level, "seed": seed, "checks": results, "passed": all(r["passed"] for r in results)}


__all__ = ["run_validation"]
