"""Monte-Carlo estimators over doped Clifford circuit ensembles.

Every estimator splits its samples into ``n_batches`` (at least 30) batches.
Batch ``j`` draws from its own generator, spawned from the master seed by
:class:`numpy.random.SeedSequence`, so results do not depend on how batches
are scheduled across worker threads.  Standard errors come from the spread of
batch means; the purity variance uses a leave-one-batch-out jackknife.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuits import DENSE_MAX_QUBITS, STATE_MAX_QUBITS, DopedCircuitSpec, sample_doped_batch
from .pauli import PauliString

MIN_BATCHES = 30
DEFAULT_BATCHES = 32
THREADS_ENV = "DOPEDCLIFFORD_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EstimatorResult:
    """Monte-Carlo estimate with a batch-based standard error."""

    mean: float
    stderr: float
    samples: int
    seed: int
    batch_means: np.ndarray = field(repr=False, default=None)
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def n_batches(self) -> int:
        return 0 if self.batch_means is None else len(self.batch_means)

    def z(self, target) -> float:
        """``(mean - target) / stderr``."""
        return (self.mean - float(target)) / self.stderr if self.stderr > 0 else float("inf")

    def within(self, target, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - float(target)) <= n_sigma * self.stderr


def _batch_sizes(samples: int, n_batches: int) -> list[int]:
    if n_batches < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} batches, got {n_batches}")
    if samples < n_batches:
        raise ValueError(f"need at least one sample per batch ({samples} < {n_batches})")
    base, extra = divmod(samples, n_batches)
    return [base + (1 if j < extra else 0) for j in range(n_batches)]


def _run_batches(fn, samples: int, seed: int, n_batches: int, workers: int | None):
    """Evaluate ``fn(size, rng)`` per batch; returns per-batch outputs in batch order."""
    sizes = _batch_sizes(samples, n_batches)
    seqs = np.random.SeedSequence(seed).spawn(n_batches)
    jobs = [(size, np.random.default_rng(s)) for size, s in zip(sizes, seqs)]
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [fn(size, rng) for size, rng in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _mean_result(per_batch: list[np.ndarray], samples: int, seed: int, extras=None) -> EstimatorResult:
    sums = np.array([np.sum(v) for v in per_batch])
    sizes = np.array([len(v) for v in per_batch])
    means = sums / sizes
    stderr = float(np.std(means, ddof=1) / np.sqrt(len(means)))
    return EstimatorResult(float(np.sum(sums) / samples), stderr, samples, seed, means, extras or {})


# ------------------------------------------------------------------- OTOC

def _as_pauli(p, n: int) -> PauliString | None:
    if p is None:
        return None
    if isinstance(p, PauliString):
        if p.n != n:
            raise ValueError("Pauli string length differs from N")
        return None if not p.support else p
    raise TypeError(f"expected a PauliString or None, got {type(p).__name__}")


def default_otoc_paulis(n: int) -> tuple[PauliString, ...]:
    """``X`` on qubits 0, 1, 2, 3 (as ``A, B, C, D``)."""
    if n < 4:
        raise ValueError("four disjoint single-qubit Paulis need N >= 4")
    return tuple(PauliString.single(n, q, "X") for q in range(4))


def check_disjoint_paulis(paulis, n: int):
    """Require non-identity single-qubit Paulis on pairwise different qubits."""
    supports = []
    for p in paulis:
        p = _as_pauli(p, n)
        if p is None:
            raise ValueError("OTOC operators must be non-identity Paulis")
        s = sorted(p.support)
        if len(s) != 1:
            raise ValueError("OTOC operators must act on a single qubit")
        supports.append(s[0])
    if len(set(supports)) != len(supports):
        raise ValueError("OTOC operators must act on pairwise different qubits")


def _evolve(u: np.ndarray, ud: np.ndarray, m: np.ndarray | None):
    return None if m is None else u @ m @ ud


def _mul(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a @ b


def otoc_values(unitaries: np.ndarray, a_ops, b_ops) -> np.ndarray:
    """``d^-1 tr(A_1 V A_1^dag V^dag)`` with ``V = B_1^U A_2 B_2^U ... A_m B_m^U`` per unitary.

    Operators are dense matrices or ``None`` for identity; identities are
    skipped, so trailing identities leave the arithmetic unchanged.
    """
    d = unitaries.shape[1]
    ud = np.conj(np.swapaxes(unitaries, 1, 2))
    v = None
    for j, (a, b) in enumerate(zip(a_ops, b_ops)):
        if j > 0:
            v = _mul(v, a)
        v = _mul(v, _evolve(unitaries, ud, b))
    a1 = a_ops[0]
    vd = None if v is None else np.conj(np.swapaxes(v, -1, -2))
    prod = _mul(_mul(_mul(a1, v), None if a1 is None else a1.conj().T), vd)
    if prod is None:
        return np.ones(unitaries.shape[0])
    if prod.ndim == 2:
        prod = np.broadcast_to(prod, unitaries.shape)
    return np.real(np.trace(prod, axis1=1, axis2=2)) / d


def _otoc_runner(spec: DopedCircuitSpec, a_ops, b_ops, chunk: int):
    def run(size, rng):
        batch = sample_doped_batch(spec, size, rng)
        out = np.empty(size)
        for start in range(0, size, chunk):
            stop = min(size, start + chunk)
            sub = _slice_batch(batch, start, stop)
            out[start:stop] = otoc_values(sub.unitaries(), a_ops, b_ops)
        return out
    return run


def _slice_batch(batch, start, stop):
    from .circuits import CliffordBatch, DopedCircuitBatch

    layers = tuple(CliffordBatch(l.n, l.slots[start:stop], l.pauli[start:stop]) for l in batch.layers)
    return DopedCircuitBatch(batch.spec, layers, batch.qubits[:, start:stop])


def mc_otoc4m(spec: DopedCircuitSpec, a_list, b_list, samples: int, n_batches: int = DEFAULT_BATCHES,
              workers: int | None = None, chunk: int = 4096) -> EstimatorResult:
    """Estimate ``<OTOC_4m>`` with ``A_1..A_m`` fixed and ``B_1..B_m`` evolved.

    Entries may be Pauli strings or ``None`` (identity).  For ``m = 2`` with
    ``(A_1, A_2, B_1, B_2) = (A, C, B, D)`` this is the 8-point OTOC, and it
    uses the same random stream as :func:`mc_otoc8`.
    """
    n = spec.n_qubits
    m = len(a_list)
    if m < 2:
        raise ValueError("OTOC_4m needs m >= 2")
    if len(b_list) != m:
        raise ValueError("A and B lists must have the same length")
    if n > DENSE_MAX_QUBITS:
        raise ValueError(f"OTOC estimation uses dense unitaries, N <= {DENSE_MAX_QUBITS}")
    a_ops = [None if p is None else p.matrix() for p in (_as_pauli(x, n) for x in a_list)]
    b_ops = [None if p is None else p.matrix() for p in (_as_pauli(x, n) for x in b_list)]
    per_batch = _run_batches(_otoc_runner(spec, a_ops, b_ops, chunk), samples, spec.seed, n_batches, workers)
    return _mean_result(per_batch, samples, spec.seed)


def mc_otoc8(spec: DopedCircuitSpec, paulis=None, samples: int = 10_000,
             n_batches: int = DEFAULT_BATCHES, workers: int | None = None) -> EstimatorResult:
    """Estimate ``<d^-1 tr(A B_U C D_U A D_U C B_U)>`` for disjoint single-qubit Paulis."""
    paulis = default_otoc_paulis(spec.n_qubits) if paulis is None else tuple(paulis)
    if len(paulis) != 4:
        raise ValueError("need four Paulis A, B, C, D")
    check_disjoint_paulis(paulis, spec.n_qubits)
    a, b, c, d = paulis
    return mc_otoc4m(spec, [a, c], [b, d], samples, n_batches, workers)


# ----------------------------------------------------------------- purity

def marginal_purity(states: np.ndarray, n_a: int) -> np.ndarray:
    """``tr(psi_A^2)`` for each row of ``states`` with A the first ``n_a`` qubits."""
    b, d = states.shape
    m = states.reshape(b, 2 ** n_a, d >> n_a)
    if 2 ** n_a <= d >> n_a:
        g = m @ np.conj(np.swapaxes(m, 1, 2))
    else:
        g = np.conj(np.swapaxes(m, 1, 2)) @ m
    return np.sum(np.abs(g) ** 2, axis=(1, 2))


def random_product_states(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` tensor products of independent Haar-random single-qubit states."""
    out = np.ones((size, 1), dtype=complex)
    for _ in range(n):
        v = rng.normal(size=(size, 2)) + 1j * rng.normal(size=(size, 2))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        out = (out[:, :, None] * v[:, None, :]).reshape(size, -1)
    return out


def haar_states(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=(size, 2 ** n)) + 1j * rng.normal(size=(size, 2 ** n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def initial_states(state, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``"zero"``, ``"random-product"`` (fresh per sample) or a fixed state vector."""
    if isinstance(state, str):
        if state in ("zero", "stabilizer"):
            out = np.zeros((size, 2 ** n), dtype=complex)
            out[:, 0] = 1
            return out
        if state == "random-product":
            return random_product_states(n, size, rng)
        raise ValueError(f"unknown state class {state!r}")
    vec = np.asarray(state, dtype=complex)
    if vec.shape != (2 ** n,) or abs(np.linalg.norm(vec) - 1) > 1e-10:
        raise ValueError("explicit state must be a normalised vector of length 2^N")
    return np.broadcast_to(vec, (size, 2 ** n)).copy()


def evolve_states(spec: DopedCircuitSpec, state, size: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``size`` circuits and apply each to its own copy of the initial state."""
    if spec.n_qubits > STATE_MAX_QUBITS:
        raise ValueError(f"state simulation limited to N <= {STATE_MAX_QUBITS}")
    batch = sample_doped_batch(spec, size, rng)
    return batch.apply(initial_states(state, spec.n_qubits, size, rng))


def _purity_runner(spec, n_a, state, chunk):
    def run(size, rng):
        out = np.empty(size)
        for start in range(0, size, chunk):
            stop = min(size, start + chunk)
            out[start:stop] = marginal_purity(evolve_states(spec, state, stop - start, rng), n_a)
        return out
    return run


def jackknife_variance(per_batch: list[np.ndarray]):
    """Leave-one-batch-out jackknife for the (unbiased) sample variance.

    Returns ``(estimate, stderr)``; sums are taken about the overall mean to
    avoid cancellation.
    """
    sizes = np.array([len(v) for v in per_batch], dtype=float)
    total = float(np.sum(sizes))
    centre = float(np.sum([np.sum(v) for v in per_batch]) / total)
    s1 = np.array([np.sum(v - centre) for v in per_batch])
    s2 = np.array([np.sum((v - centre) ** 2) for v in per_batch])

    def var(n, a, b):
        return (b - a * a / n) / (n - 1)

    full = var(total, s1.sum(), s2.sum())
    loo = np.array([var(total - sizes[j], s1.sum() - s1[j], s2.sum() - s2[j]) for j in range(len(sizes))])
    g = len(sizes)
    estimate = g * full - (g - 1) * loo.mean()
    stderr = float(np.sqrt((g - 1) / g * np.sum((loo - loo.mean()) ** 2)))
    return float(estimate), stderr, loo


def mc_purity_fluct(spec: DopedCircuitSpec, n_a: int, state="zero", samples: int = 10_000,
                    n_batches: int = DEFAULT_BATCHES, workers: int | None = None,
                    chunk: int = 65536) -> EstimatorResult:
    """Variance over circuits of the purity of the first ``n_a`` qubits.

    ``extras["mean"]`` holds the estimate of the average purity.
    """
    if not 0 <= n_a <= spec.n_qubits:
        raise ValueError(f"subsystem size {n_a} out of range")
    per_batch = _run_batches(_purity_runner(spec, n_a, state, chunk), samples, spec.seed, n_batches, workers)
    estimate, stderr, loo = jackknife_variance(per_batch)
    mean = _mean_result(per_batch, samples, spec.seed)
    return EstimatorResult(estimate, stderr, samples, spec.seed, loo, {"mean": mean})


def mc_state_moment(spec: DopedCircuitSpec, observable: np.ndarray, power: int, samples: int,
                    state="zero", haar: bool = False, n_batches: int = DEFAULT_BATCHES,
                    workers: int | None = None) -> EstimatorResult:
    """Average of ``<psi|O|psi>^power`` over circuit outputs, or over Haar states if ``haar``."""
    obs = np.asarray(observable, dtype=complex)

    def run(size, rng):
        psi = haar_states(spec.n_qubits, size, rng) if haar else evolve_states(spec, state, size, rng)
        vals = np.real(np.einsum("bi,ij,bj->b", psi.conj(), obs, psi))
        return vals ** power

    per_batch = _run_batches(run, samples, spec.seed, n_batches, workers)
    return _mean_result(per_batch, samples, spec.seed)


# ---------------------------------------------------------- sampler checks

def clifford_class_counts(n: int, samples: int, rng: np.random.Generator) -> dict:
    """Histogram of sampled Clifford elements by their Pauli-conjugation action (N <= 2)."""
    from .clifford import pauli_class_key, sample_clifford_batch

    batch = sample_clifford_batch(n, samples, rng)
    eye = np.broadcast_to(np.eye(2 ** n, dtype=complex), (samples, 2 ** n, 2 ** n)).copy()
    us = batch.apply(eye)
    counts: dict = {}
    for u in us:
        key = pauli_class_key(u, n)
        counts[key] = counts.get(key, 0) + 1
    return counts


def chi_square_uniformity(counts, n_classes: int):
    """Chi-square statistic and p-value for uniformity over ``n_classes`` cells."""
    from scipy.stats import chi2

    obs = np.zeros(n_classes)
    vals = list(counts.values()) if isinstance(counts, dict) else list(counts)
    if len(vals) > n_classes:
        raise ValueError("more observed classes than cells")
    obs[:len(vals)] = vals
    expected = obs.sum() / n_classes
    stat = float(np.sum((obs - expected) ** 2) / expected)
    return stat, float(chi2.sf(stat, n_classes - 1))


__all__ = [
    "EstimatorResult", "mc_otoc8", "mc_otoc4m", "mc_purity_fluct", "mc_state_moment",
    "otoc_values", "marginal_purity", "random_product_states", "haar_states", "initial_states",
    "evolve_states", "jackknife_variance", "default_otoc_paulis", "check_disjoint_paulis",
    "clifford_class_counts", "chi_square_uniformity", "default_workers",
]
