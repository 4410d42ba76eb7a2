import math
from fractions import Fraction

import numpy as np
import pytest

from dopedclifford import closed_forms as cf
from dopedclifford.circuits import DopedCircuitSpec
from dopedclifford.montecarlo import (check_disjoint_paulis, default_otoc_paulis, jackknife_variance,
                                      marginal_purity, mc_otoc4m, mc_otoc8, mc_purity_fluct, mc_state_moment,
                                      otoc_values, random_product_states)
from dopedclifford.pauli import PauliString


def test_identity_circuit_gives_unit_otoc():
    paulis = default_otoc_paulis(4)
    us = np.eye(16, dtype=complex)[None]
    a, b, c, d = (p.matrix() for p in paulis)
    assert np.allclose(otoc_values(us, [a, c], [b, d]), 1)


def test_disjointness_is_enforced():
    with pytest.raises(ValueError):
        check_disjoint_paulis([PauliString("XIII"), PauliString("XIII"), PauliString("IIXI"), PauliString("IIIX")], 4)
    with pytest.raises(ValueError):
        check_disjoint_paulis([PauliString("XXII")] * 4, 4)
    with pytest.raises(ValueError):
        default_otoc_paulis(3)


def test_otoc_reproducible_and_worker_independent():
    spec = DopedCircuitSpec(4, 1, seed=11)
    r1 = mc_otoc8(spec, samples=640, workers=1)
    r2 = mc_otoc8(spec, samples=640, workers=2)
    assert r1.mean == r2.mean and r1.stderr == r2.stderr
    assert r1.n_batches == 32


def test_too_few_batches_rejected():
    with pytest.raises(ValueError):
        mc_otoc8(DopedCircuitSpec(4, 0), samples=1000, n_batches=10)


def test_otoc_k1_matches_trace_form():
    res = mc_otoc8(DopedCircuitSpec(4, 1, seed=3), samples=6400)
    assert res.within(cf.otoc8_trace_doped(16, 1), 4)


def test_six_point_otoc_is_finite_and_error_shrinks():
    a = [PauliString("XIII"), PauliString("IIZI"), PauliString("XIII")]
    b = [PauliString("IXII"), PauliString("IIIY"), PauliString("IXII")]
    small = mc_otoc4m(DopedCircuitSpec(4, 8, seed=1), a, b, samples=640)
    large = mc_otoc4m(DopedCircuitSpec(4, 8, seed=2), a, b, samples=6400)
    assert np.isfinite(small.mean) and np.isfinite(large.mean)
    assert 1.5 < small.stderr / large.stderr < 6


def test_marginal_purity():
    zero = np.zeros((1, 4), dtype=complex)
    zero[0, 0] = 1
    bell = np.array([[1, 0, 0, 1]]) / np.sqrt(2)
    assert marginal_purity(zero, 1) == pytest.approx(1)
    assert marginal_purity(bell, 1) == pytest.approx(0.5)
    prod = random_product_states(4, 3, np.random.default_rng(0))
    assert np.allclose(marginal_purity(prod, 2), 1)


def test_jackknife_matches_plain_variance():
    rng = np.random.default_rng(4)
    data = [rng.normal(size=200) for _ in range(30)]
    est, err, _ = jackknife_variance(data)
    flat = np.concatenate(data)
    # bias correction only moves an unbiased estimator at second order
    assert est == pytest.approx(np.var(flat, ddof=1), rel=1e-3)
    assert 0 < err < 0.1


def test_purity_mean_and_variance_at_k0():
    res = mc_purity_fluct(DopedCircuitSpec(4, 0, seed=5), 2, samples=64_000)
    assert res.within(cf.purity_fluct(16, 0), 4)
    assert res.extras["mean"].within(Fraction(8, 17), 4)


def test_purity_with_random_product_inputs():
    res = mc_purity_fluct(DopedCircuitSpec(4, 2, seed=6), 2, state="random-product", samples=64_000)
    assert res.within(cf.purity_fluct(16, 2, state="random-product"), 4)


def test_state_moment_clifford_matches_haar_up_to_third_power():
    z = np.diag([1, -1, 1, -1]).astype(complex)
    spec = DopedCircuitSpec(2, 0, seed=9)
    clifford = mc_state_moment(spec, z, 2, samples=32_000)
    haar = mc_state_moment(spec, z, 2, samples=32_000, haar=True)
    assert abs(clifford.mean - haar.mean) <= 4 * math.hypot(clifford.stderr, haar.stderr)
    assert haar.mean == pytest.approx(1 / 5, abs=4 * haar.stderr)
