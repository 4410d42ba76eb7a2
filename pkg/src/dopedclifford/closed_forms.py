"""Closed-form chaos probes for k-doped Clifford circuits.

All formulas are evaluated in exact rational arithmetic whenever the doping
rate ``f^-_theta`` is rational (``cos 4 theta`` rational), so that gaps of
order ``d^-4`` survive.  ``k = math.inf`` denotes the Haar limit.

Two 8-point OTOC families are provided:

* ``otoc8_*``: the reference four-term closed form in the T-gate rates
  ``f^+`` and ``f^-``, normalised so that ``k = 0`` gives ``d^2/(d^4-5d^2+4)``
  and ``k -> inf`` gives ``5d^2/((d^2-1)(d^2-4)(d^2-9))``.
* ``otoc8_trace_*``: the closed form of the trace
  ``d^-1 tr(A B_U C D_U A D_U C B_U)`` for four disjoint single-qubit
  Paulis, derived from the moment engine and confirmed by group enumeration
  and Monte Carlo.  This is what a circuit simulation measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import exact
from .engine import f_pm_theta, state_channel
from .pauli import q_value, random_product_trace_q_mean
from .s4 import PERMS, Perm4, compose

T_GATE = math.pi / 4
PHYSICAL_OTOC_MIN_D = 16
PURITY_SWAP = Perm4.from_cycles((1, 2), (3, 4))

OTOC_PROBES = ("otoc8", "otoc8-trace")
PURITY_PROBES = ("purity",)


class PoleError(ValueError):
    """A closed form was evaluated at one of its poles."""


# ----------------------------------------------------------------- helpers

def _check_dim(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    return int(d)


def _otoc_dim(d) -> int:
    d = _check_dim(d)
    if d in (1, 2, 3):
        raise PoleError(f"8-point OTOC closed form has a pole at d={d}")
    return d


def _check_k(k):
    if k == math.inf:
        return k
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer or math.inf, got {k}")
    return int(k)


def _pow(f, k):
    return 0 if k == math.inf else f ** k


def _rates(d: int, theta: float = T_GATE):
    f_plus, f_minus = f_pm_theta(theta, d)
    return f_plus, f_minus, (f_plus + f_minus) / 2


def _sqrt_dim(d: int) -> int:
    d = _check_dim(d)
    r = math.isqrt(d)
    if r * r != d:
        raise ValueError(f"d_A = d_B = sqrt(d) needs a square dimension, got d={d}")
    return r


def _no_haar_limit(theta):
    if exact.cos4(theta) == 1:
        raise ValueError(f"theta={theta} is a Clifford phase: doping has no k -> inf limit")


def is_formal_otoc(d: int) -> bool:
    """Four disjoint single-qubit Paulis need N >= 4; smaller d is a formal evaluation."""
    return d < PHYSICAL_OTOC_MIN_D


# ------------------------------------------------------------ OTOC: reference form

def otoc8_haar(d: int) -> Fraction:
    """``5 d^2 / ((d^2-1)(d^2-4)(d^2-9))``."""
    d = _otoc_dim(d)
    return Fraction(5 * d * d, (d * d - 1) * (d * d - 4) * (d * d - 9))


def otoc8_clifford(d: int) -> Fraction:
    """``d^2 / (d^4 - 5 d^2 + 4)``."""
    d = _otoc_dim(d)
    return Fraction(d * d, d ** 4 - 5 * d * d + 4)


def otoc8_amplitudes(d: int) -> dict:
    """Coefficients of ``f+^k``, ``f-^k`` and ``((f+ + f-)/2)^k`` in :func:`otoc8_doped`."""
    d = _otoc_dim(d)
    return {
        "f+": -Fraction(d * (d * d - 4 * d + 6), 6 * (d * d - 1) * (d - 2) * (d - 3)),
        "f-": Fraction(d * (d * d + 4 * d + 6), 6 * (d * d - 1) * (d + 2) * (d + 3)),
        "avg": Fraction(4 * d * d, 3 * (d * d - 1) * (d * d - 4)),
    }


def otoc8_doped(d: int, k) -> Fraction:
    """Reference closed form of the T-doped 8-point OTOC average."""
    k = _check_k(k)
    amp = otoc8_amplitudes(d)
    fp, fm, fa = _rates(d)
    return otoc8_haar(d) + amp["f+"] * _pow(fp, k) + amp["f-"] * _pow(fm, k) + amp["avg"] * _pow(fa, k)


# ------------------------------------------------------ OTOC: trace definition

def otoc8_trace_haar(d: int) -> Fraction:
    """Haar average of the trace definition: ``-(d^2+36)/((d^2-1)(d^2-4)(d^2-9))``."""
    d = _otoc_dim(d)
    return Fraction(-(d * d + 36), (d * d - 1) * (d * d - 4) * (d * d - 9))


def otoc8_trace_clifford(d: int) -> Fraction:
    """Clifford average of the trace definition: ``-1/(d^2-1)``."""
    d = _otoc_dim(d)
    return Fraction(-1, d * d - 1)


def otoc8_trace_amplitudes(d: int) -> dict:
    d = _otoc_dim(d)
    return {
        "f+": -Fraction(d * d * (d - 4), 6 * (d * d - 1) * (d - 2) * (d - 3)),
        "f-": Fraction(d * d * (d + 4), 6 * (d * d - 1) * (d + 2) * (d + 3)),
        "avg": -Fraction(2 * d * d, 3 * (d * d - 1) * (d * d - 4)),
    }


def otoc8_trace_doped(d: int, k) -> Fraction:
    """T-doped average of ``d^-1 tr(A B_U C D_U A D_U C B_U)`` for disjoint Paulis."""
    k = _check_k(k)
    amp = otoc8_trace_amplitudes(d)
    fp, fm, fa = _rates(d)
    return (otoc8_trace_haar(d) + amp["f+"] * _pow(fp, k) + amp["f-"] * _pow(fm, k)
            + amp["avg"] * _pow(fa, k))


def otoc8_via_channel(n_qubits: int, k, theta: float = T_GATE, paulis=None):
    """Evaluate the trace definition by contracting the doped fourth-moment channel.

    ``paulis`` defaults to X on qubits 0, 1, 2, 3 (as ``A, B, C, D``).  Works
    for any ``theta``, including non-T phase gates.
    """
    from .engine import build_xi_system, fold_channel_doped, haar_limit_coefficients
    from .pauli import PauliString, pauli4_traces

    if paulis is None:
        if n_qubits < 4:
            raise ValueError("default disjoint Paulis need N >= 4")
        paulis = [PauliString.single(n_qubits, q, "X") for q in range(4)]
    a, b, c, dd = paulis
    qv, tv = pauli4_traces((b, dd, dd, b))
    mq, mt = pauli4_traces((a, c, a, c))
    rho = Perm4.from_cycles((1, 4, 3, 2))
    idx = [compose(s, rho).index for s in PERMS]
    wq, wt = [mq[i] for i in idx], [mt[i] for i in idx]
    if k == math.inf:
        ch = haar_limit_coefficients((qv, tv), theta, n_qubits)
    else:
        system = build_xi_system(theta, n_qubits) if k else None
        ch = fold_channel_doped((qv, tv), int(k), theta if k else None, n_qubits, system=system)
    return ch.trace_with(wq, wt) / (2 ** n_qubits)


def delta_otoc(d: int, k, probe: str = "otoc8") -> Fraction:
    """``|<OTOC_8>_k - <OTOC_8>_Haar|`` for the chosen OTOC family."""
    if probe == "otoc8":
        return abs(otoc8_doped(d, k) - otoc8_haar(d))
    if probe == "otoc8-trace":
        return abs(otoc8_trace_doped(d, k) - otoc8_trace_haar(d))
    raise ValueError(f"unknown OTOC probe {probe!r}")


# ------------------------------------------------------------------ purity

def purity_average(d_a: int, d_b: int) -> Fraction:
    """``(d_A + d_B) / (d_A d_B + 1)``, identical for Haar and Clifford circuits."""
    d_a, d_b = _check_dim(d_a), _check_dim(d_b)
    return Fraction(d_a + d_b, d_a * d_b + 1)


def purity_fluct_haar(d: int) -> Fraction:
    """``2 (d-1)^2 / ((d+1)^2 (d+2)(d+3))``."""
    d = _check_dim(d)
    return Fraction(2 * (d - 1) ** 2, (d + 1) ** 2 * (d + 2) * (d + 3))


def purity_fluct_clifford(d: int, trq) -> Fraction:
    """Undoped fluctuation ``(d-1)(d(d+1) trQ - 2) / ((d+1)^2 (d+2))``."""
    d = _check_dim(d)
    return (d - 1) * (d * (d + 1) * trq - 2) / Fraction((d + 1) ** 2 * (d + 2))


def random_product_trq(d: int) -> Fraction:
    """Local-Haar average of ``tr(Q psi^4)`` for a random product state: ``(2/5)^N``."""
    n = _qubit_count(d)
    return random_product_trace_q_mean(n)


def _qubit_count(d: int) -> int:
    n = int(d).bit_length() - 1
    if d < 1 or 2 ** n != d:
        raise ValueError(f"expected d = 2^N, got {d}")
    return n


def _state_trq(d: int, state):
    if state in ("zero", "stabilizer"):
        return Fraction(1, d)
    if state == "random-product":
        return random_product_trq(d)
    if exact.is_exact(state) or isinstance(state, float):
        return state
    raise ValueError(f"unknown state class {state!r}")


def purity_fluct_general(d: int, k, theta: float, trq):
    """Equal-bipartition fluctuation for any value of ``tr(Q psi^4)``:

    ``2(d-1)^2/((d+1)^2(d+2)(d+3)) + (d-1)(d(d+3) trQ - 4) f-^k / ((d+1)(d+2)(d+3))``.
    """
    _sqrt_dim(d)
    k = _check_k(k)
    if k == math.inf:
        _no_haar_limit(theta)
    _, fm = f_pm_theta(theta, d)
    return purity_fluct_haar(d) + (d - 1) * (d * (d + 3) * trq - 4) * _pow(fm, k) / Fraction(
        (d + 1) * (d + 2) * (d + 3))


def purity_fluct(d: int, k, theta: float = T_GATE, state="zero"):
    """Fluctuation of the half-system purity after a k-doped circuit.

    ``state`` is ``"zero"`` (any stabilizer state), ``"random-product"``
    (local-Haar product states, averaged) or an explicit ``tr(Q psi^4)``;
    the explicit case is computed from the output channel coefficients
    ``(a_k, b_k)`` rather than from a closed form.
    """
    _sqrt_dim(d)
    if state in ("zero", "stabilizer"):
        k = _check_k(k)
        if k == math.inf:
            _no_haar_limit(theta)
        _, fm = f_pm_theta(theta, d)
        return Fraction((d - 1) ** 2, (d + 1) ** 2 * (d + 2) * (d + 3)) * (2 + (d + 1) * _pow(fm, k))
    if state == "random-product":
        return purity_fluct_general(d, k, theta, random_product_trq(d))
    n = _qubit_count(d)
    h = n // 2
    return purity_second_moment_exact(h, h, k, theta, _state_trq(d, state)) - purity_average(2 ** h, 2 ** h) ** 2


def purity_second_moment(d: int, k, theta: float = T_GATE):
    """``<Pur^2> = (2(2d^2+9d+1) + (d-1)^2 f-^k) / ((d+1)(d+2)(d+3))`` for stabilizer input."""
    _sqrt_dim(d)
    k = _check_k(k)
    if k == math.inf:
        _no_haar_limit(theta)
    _, fm = f_pm_theta(theta, d)
    return (2 * (2 * d * d + 9 * d + 1) + (d - 1) ** 2 * _pow(fm, k)) / Fraction((d + 1) * (d + 2) * (d + 3))


def _sym_traces_with_swap(n_a: int, n_b: int):
    """``(tr(Q Pi_sym T^A), tr(Pi_sym T^A))`` with ``T^A`` the (12)(34) swap on subsystem A."""
    d_a, d_b = 2 ** n_a, 2 ** n_b
    tq = tt = Fraction(0)
    for p in PERMS:
        pv = compose(p, PURITY_SWAP)
        tq += q_value(pv) ** n_a * q_value(p) ** n_b
        tt += Fraction(d_a) ** pv.n_cycles * Fraction(d_b) ** p.n_cycles
    return tq / 24, tt / 24


def purity_second_moment_exact(n_a: int, n_b: int, k, theta: float, trq):
    """``<Pur(psi_A)^2>`` from ``Phi(psi^4) = a_k Q Pi_sym + b_k Pi_sym``, any bipartition."""
    if n_a < 0 or n_b < 0 or n_a + n_b < 1:
        raise ValueError("need non-negative subsystem sizes with N >= 1")
    a, b = state_channel(trq, k, theta, n_a + n_b)
    tq, tt = _sym_traces_with_swap(n_a, n_b)
    return a * tq + b * tt


def purity_fluct_exact(n_a: int, n_b: int, k, theta: float, trq):
    return purity_second_moment_exact(n_a, n_b, k, theta, trq) - purity_average(2 ** n_a, 2 ** n_b) ** 2


def purity_fluct_asymmetric(d: int, d_a: int, k, theta: float, trq):
    """Fluctuation of the purity of a ``d_A``-dimensional subsystem (``d_A^2 <= d``).

    ``2(d^2-d_A^2)(d_A^2-1)/((d+1)^2(d+2)(d+3)d_A^2)
      + (d^2-d_A^2)(d_A^2-1) f-^k (d(d+3) trQ - 4) / ((d-1)(d+1)(d+2)(d+3)d_A^2)``;
    it coincides with the exact contraction for every ``d_A``.
    """
    d, d_a = _check_dim(d), _check_dim(d_a)
    if d_a * d_a > d:
        raise ValueError(f"need d_A^2 <= d, got d_A={d_a}, d={d}")
    if d == 1:
        raise PoleError("d = 1 is a pole of the fluctuation formula")
    k = _check_k(k)
    if k == math.inf:
        _no_haar_limit(theta)
    _, fm = f_pm_theta(theta, d)
    s = (d * d - d_a * d_a) * (d_a * d_a - 1)
    first = Fraction(2 * s, (d + 1) ** 2 * (d + 2) * (d + 3) * d_a * d_a)
    return first + s * _pow(fm, k) * (d * (d + 3) * trq - 4) / Fraction(
        (d - 1) * (d + 1) * (d + 2) * (d + 3) * d_a * d_a)


def delta_purity(d: int, k, theta: float = T_GATE, state="zero"):
    """``|Delta_k Pur - Delta_Haar Pur|``."""
    return abs(purity_fluct(d, k, theta, state) - purity_fluct_haar(d))


# -------------------------------------------------------------- predictions

REGIMES = ("clifford", "doped", "haar")


@dataclass(frozen=True)
class ProbePrediction:
    """One closed-form value together with the parameters that produced it."""

    probe: str
    d: int
    value: object
    k: object = None
    theta: float | None = None
    d_a: int | None = None
    state: str | None = None
    formal: bool = False
    regime: str = field(init=False)

    def __post_init__(self):
        if self.k is None or self.k == 0:
            regime = "clifford"
        elif self.k == math.inf:
            regime = "haar"
        else:
            regime = "doped"
        object.__setattr__(self, "regime", regime)

    @property
    def is_exact(self) -> bool:
        return exact.is_exact(self.value)

    def __float__(self):
        return float(self.value)


def predict(probe: str, d: int, k=0, theta: float = T_GATE, d_a: int | None = None,
            state="zero") -> ProbePrediction:
    """Dispatch to the closed form for ``probe``.

    Probes: ``otoc8``, ``otoc8-trace``, ``purity-mean``, ``purity-variance``,
    ``purity-second-moment``.
    """
    if probe in OTOC_PROBES:
        fn = otoc8_doped if probe == "otoc8" else otoc8_trace_doped
        return ProbePrediction(probe, d, fn(d, k), k=k, theta=T_GATE, formal=is_formal_otoc(d))
    if probe == "purity-mean":
        d_a = d_a if d_a is not None else _sqrt_dim(d)
        if d % d_a:
            raise ValueError(f"d_A={d_a} does not divide d={d}")
        return ProbePrediction(probe, d, purity_average(d_a, d // d_a), d_a=d_a)
    if probe == "purity-variance":
        name = state if isinstance(state, str) else "custom"
        if d_a is None or d_a * d_a == d:
            value = purity_fluct(d, k, theta, state)
            d_a = _sqrt_dim(d)
        else:
            value = purity_fluct_asymmetric(d, d_a, k, theta, _state_trq(d, state))
        return ProbePrediction(probe, d, value, k=k, theta=theta, d_a=d_a, state=name)
    if probe == "purity-second-moment":
        if state not in ("zero", "stabilizer"):
            raise ValueError("the second-moment closed form is for stabilizer input")
        return ProbePrediction(probe, d, purity_second_moment(d, k, theta), k=k, theta=theta,
                               d_a=_sqrt_dim(d), state="zero")
    raise ValueError(f"unknown probe {probe!r}")


# ---------------------------------------------------------------- thresholds

@dataclass(frozen=True)
class ThresholdQuery:
    """Smallest doping after which a probe stays within ``r`` times its Haar value.

    ``probe`` is ``"otoc8"``, ``"otoc8-trace"`` or ``"purity"``; ``theta`` and
    ``state`` and ``d_a`` only matter for the purity probe.  The subsystem
    defaults to ``d_A = 2^floor(N/2)``, i.e. the half system when N is even.
    """

    d: int
    r: float = 1
    probe: str = "otoc8"
    theta: float = T_GATE
    state: object = "zero"
    d_a: int | None = None

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"ratio r must be positive, got {self.r}")
        if self.probe not in OTOC_PROBES + PURITY_PROBES:
            raise ValueError(f"unknown threshold probe {self.probe!r}")

    def subsystem_dim(self) -> int:
        if self.d_a is not None:
            if self.d_a * self.d_a > self.d:
                raise ValueError("need d_A^2 <= d")
            return self.d_a
        return 2 ** (_qubit_count(self.d) // 2)


def _gap_terms(q: ThresholdQuery):
    """Haar value and the (amplitude, rate) pairs of ``probe_k - probe_Haar``."""
    d = q.d
    if q.probe in OTOC_PROBES:
        if q.probe == "otoc8":
            haar, amp = otoc8_haar(d), otoc8_amplitudes(d)
        else:
            haar, amp = otoc8_trace_haar(d), otoc8_trace_amplitudes(d)
        fp, fm, fa = _rates(d)
        return haar, [(amp["f+"], fp), (amp["f-"], fm), (amp["avg"], fa)]
    _no_haar_limit(q.theta)
    d_a = q.subsystem_dim()
    _, fm = f_pm_theta(q.theta, d)
    trq = _state_trq(d, q.state)
    s = (d * d - d_a * d_a) * (d_a * d_a - 1)
    haar = Fraction(2 * s, (d + 1) ** 2 * (d + 2) * (d + 3) * d_a * d_a)
    amp = s * (d * (d + 3) * trq - 4) / Fraction((d - 1) * (d + 1) * (d + 2) * (d + 3) * d_a * d_a)
    return haar, [(amp, fm)]


def threshold_k(q: ThresholdQuery, k_max: int = 10_000) -> int:
    """Smallest ``k*`` with ``delta(k) <= r |Haar|`` for every ``k >= k*``.

    The gap is a finite sum of geometric terms, so a tail bound
    ``sum |a_i| f_max^k`` certifies that no later ``k`` exceeds the target.
    """
    haar, terms = _gap_terms(q)
    target = Fraction(q.r) * abs(haar)
    total = sum(abs(a) for a, _ in terms)
    f_max = max(f for _, f in terms)
    k_tail = 0
    bound = total
    while bound > target:
        k_tail += 1
        bound *= f_max
        if k_tail > k_max:
            raise RuntimeError("threshold search exceeded k_max")
    last_bad = -1
    for k in range(k_tail):
        if abs(sum(a * f ** k for a, f in terms)) > target:
            last_bad = k
    return last_bad + 1


def threshold_curve(n_values, r=1, probe: str = "otoc8", theta: float = T_GATE, state="zero"):
    """``[(N, d, k*)]`` over qubit counts ``n_values``."""
    return [(n, 2 ** n, threshold_k(ThresholdQuery(2 ** n, r, probe, theta, state))) for n in n_values]


@dataclass(frozen=True)
class AffineFit:
    slope: float
    intercept: float
    max_residual: float

    def predict(self, x):
        return self.slope * x + self.intercept


def fit_affine(xs, ys) -> AffineFit:
    """Least-squares line through ``(xs, ys)`` with its largest absolute residual."""
    import numpy as np

    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    return AffineFit(float(slope), float(intercept), resid)


__all__ = [
    "PoleError", "ProbePrediction", "ThresholdQuery", "AffineFit", "T_GATE",
    "otoc8_haar", "otoc8_clifford", "otoc8_doped", "otoc8_amplitudes",
    "otoc8_trace_haar", "otoc8_trace_clifford", "otoc8_trace_doped", "otoc8_trace_amplitudes",
    "otoc8_via_channel", "delta_otoc", "is_formal_otoc",
    "purity_average", "purity_fluct", "purity_fluct_haar", "purity_fluct_clifford",
    "purity_fluct_general", "purity_second_moment", "purity_second_moment_exact",
    "purity_fluct_exact", "purity_fluct_asymmetric", "random_product_trq", "delta_purity",
    "predict", "threshold_k", "threshold_curve", "fit_affine",
]
