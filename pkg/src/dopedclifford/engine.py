"""Fourth-moment channel of k-doped Clifford circuits.

One doping step maps ``Q T_pi`` through ``K^{(x)4}`` conjugation followed by a
Clifford twirl, giving ``sum_sigma Xi_{sigma pi} Q T_sigma + Lambda_{sigma pi} T_sigma``.
With

    h(rho) = tr(K^4 Q K^4dag Q T_rho),     g(rho) = tr(Q T_rho) = q(rho)^N,

and ``H``, ``G`` the class-function matrices built from them,

    Xi     = W+ H - W- (G - H)
    Lambda = W- (G - H).

All matrices involved are convolutions by class functions, so they are
symmetric and commute with one another; the index order of products is
therefore immaterial.  ``h`` factorises as ``h1(rho) * q(rho)^(N-1)`` where
``h1`` is the single-qubit trace on the qubit carrying ``K``.

An operator enters only through its 48 traces ``q_s = tr(O Q T_s)`` and
``t_s = tr(O T_s)``; its channel output is

    Phi(O) = sum_s gamma_s Q T_s + beta_s T_s,
    gamma = Xi^k c,  beta = b + Gamma^(k) c,
    c = W+ q - W- (t - q),  b = W- (t - q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import exact
from .pauli import (
    PAULI_1Q, d_pm_lambda, dense_q, operator_traces, q2_operator, q_value, trace_psi4_Q,
)
from .s4 import PERMS, SYM, Perm4, klein_cosets, perm_operator, product_table
from .weingarten import GroupMatrix, clifford_weingarten_pm, sym_trace, unitary_weingarten

EXACT_POWER_LIMIT = 64


def phase_gate(theta: float) -> np.ndarray:
    """``P_theta = |0><0| + e^{i theta} |1><1|``."""
    return np.diag([1.0, np.exp(1j * theta)])


def _kron4(m: np.ndarray) -> np.ndarray:
    return np.kron(np.kron(m, m), np.kron(m, m))


def single_qubit_h_dense(k_gate: np.ndarray) -> np.ndarray:
    """``h1(rho) = tr(T_rho Q2 K^4 Q2 K^4dag)`` for a 2x2 unitary ``K`` (float, 24 values)."""
    k_gate = np.asarray(k_gate, dtype=complex)
    if k_gate.shape != (2, 2) or not np.allclose(k_gate @ k_gate.conj().T, np.eye(2), atol=1e-12):
        raise ValueError("K must be a 2x2 unitary")
    q2 = q2_operator()
    k4 = _kron4(k_gate)
    m = q2 @ k4 @ q2 @ k4.conj().T
    vals = np.array([np.trace(perm_operator(p, 2) @ m) for p in PERMS])
    if np.max(np.abs(vals.imag)) > 1e-10:
        raise AssertionError("single-qubit trace should be real")
    return vals.real


@lru_cache(maxsize=None)
def _h1_t_gate_exact() -> tuple[Fraction, ...]:
    # With K = T, sqrt(2) K X K^dag = X + Y and sqrt(2) K Y K^dag = Y - X, so
    # 16 K^4 Q2 K^4dag = 4 I^4 + 4 Z^4 + (X+Y)^4 + (Y-X)^4 has Gaussian-integer
    # entries and float arithmetic on it is exact.
    x, y, z, i2 = PAULI_1Q["X"], PAULI_1Q["Y"], PAULI_1Q["Z"], PAULI_1Q["I"]
    conj = 4 * _kron4(i2) + 4 * _kron4(z) + _kron4(x + y) + _kron4(y - x)
    four_q2 = sum(_kron4(p) for p in PAULI_1Q.values())
    m = four_q2 @ conj
    out = []
    for p in PERMS:
        out.append(exact.to_fraction(np.trace(perm_operator(p, 2) @ m)) / 64)
    return tuple(out)


def single_qubit_h(theta: float | None = None, k_gate: np.ndarray | None = None) -> list:
    """Single-qubit trace ``h1`` for ``P_theta`` (exact when cos 4 theta is rational) or a dense ``K``.

    For phase gates ``h1`` is affine in ``cos 4 theta``; the exact path
    interpolates between ``theta = 0`` (``h1 = q``) and the T gate.
    """
    if k_gate is not None:
        return list(single_qubit_h_dense(k_gate))
    if theta is None:
        raise ValueError("give either theta or an explicit K gate")
    c4 = exact.cos4(theta)
    if not exact.is_exact(c4):
        return list(single_qubit_h_dense(phase_gate(theta)))
    w = (1 - c4) / 2
    return [q_value(p) + (ht - q_value(p)) * w for p, ht in zip(PERMS, _h1_t_gate_exact())]


@dataclass(frozen=True, eq=False)
class XiSystem:
    """Transfer matrices of one doping step on N qubits."""

    xi: GroupMatrix
    lam: GroupMatrix
    theta: float | None
    n_qubits: int
    qubit: int = 0
    w_plus: GroupMatrix = field(repr=False, default=None)
    w_minus: GroupMatrix = field(repr=False, default=None)
    h: tuple = field(repr=False, default=())
    cache: dict = field(repr=False, default_factory=dict)

    @property
    def d(self) -> int:
        return 2 ** self.n_qubits

    @property
    def kind(self) -> str:
        return self.xi.kind

    @property
    def is_clifford_gate(self) -> bool:
        return self.theta is not None and exact.cos4(self.theta) == 1 and _is_multiple(self.theta, math.pi / 2)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of Xi in decreasing order (float)."""
        return np.sort(np.linalg.eigvalsh(self.xi.array()))[::-1]


def _is_multiple(x: float, step: float) -> bool:
    r = x / step
    return abs(r - round(r)) < 1e-12


def build_xi_system(theta: float | None, n_qubits: int, k_gate: np.ndarray | None = None,
                    qubit: int = 0, degenerate: str = "continuous") -> XiSystem:
    """Build Xi and Lambda for the phase gate ``P_theta`` or a general single-qubit ``K``.

    ``qubit`` selects which qubit carries K; every qubit contributes the same
    single-qubit trace, so the result does not depend on it.

    ``degenerate`` picks how irreps lying wholly inside the Q block (the
    antisymmetric irrep at d = 4, ``[2,2]`` at d = 2) are split between the two
    branches: ``"restricted"`` uses the restricted Weingarten sums verbatim
    (Xi then has a unit eigenvalue there), ``"continuous"`` uses the
    continuous-in-d rates.  Both give the same channel.
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit index {qubit} out of range for N={n_qubits}")
    h1 = single_qubit_h(theta, k_gate)
    h, g = [], []
    for p, h1v in zip(PERMS, h1):
        factors = [h1v if j == qubit else q_value(p) for j in range(n_qubits)]
        h.append(math.prod(factors))
        g.append(q_value(p) ** n_qubits)
    kind = "exact" if all(exact.is_exact(v) for v in h) else "float"
    hm = GroupMatrix.from_class_function(h, kind)
    gm = GroupMatrix.from_class_function(g, "exact")
    w_plus, w_minus = clifford_weingarten_pm(2 ** n_qubits)
    leak = gm - hm
    xi = w_plus @ hm - w_minus @ leak
    lam = w_minus @ leak
    if degenerate == "continuous":
        for lam_irrep, shift in _degenerate_shifts(h1, n_qubits).items():
            proj = _isotypic_projector(lam_irrep, kind)
            xi = xi - proj.scale(shift)
            lam = lam + proj.scale(shift)
    elif degenerate != "restricted":
        raise ValueError(f"unknown degenerate-irrep convention {degenerate!r}")
    return XiSystem(xi, lam, theta, n_qubits, qubit, w_plus, w_minus, tuple(h))


# Per-class polynomials in d (ascending coefficients): q(rho)^N and q(rho)^(N-1)
# written as polynomials in d = 2^N, indexed by CycleClass.position.
_Q_POLY = ([0, 0, 1], [0, 1], [0, 0, 1], [1], [0, 1])
_Q_REST_POLY = ([0, 0, Fraction(1, 4)], [0, Fraction(1, 2)], [0, 0, Fraction(1, 4)], [1], [0, Fraction(1, 2)])


def _poly_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _poly_scale(a, c):
    return [c * x for x in a]


def _poly_eval(a, x):
    return sum(c * x ** i for i, c in enumerate(a))


def _poly_deflate(a, root):
    """Divide by ``(d - root)``; the caller guarantees ``a(root) = 0``."""
    out = [0] * (len(a) - 1)
    carry = 0
    for i in range(len(a) - 1, 0, -1):
        carry = a[i] + carry * root
        out[i - 1] = carry
    return out


def _limit_ratio(num, den, x, tol):
    for _ in range(8):
        if abs(_poly_eval(den, x)) > tol:
            return _poly_eval(num, x) / _poly_eval(den, x)
        if abs(_poly_eval(num, x)) > tol:
            raise ArithmeticError("pole in degenerate-irrep continuation")
        num, den = _poly_deflate(num, x), _poly_deflate(den, x)
    raise ArithmeticError("degenerate-irrep continuation did not terminate")


def _degenerate_shifts(h1, n_qubits: int) -> dict:
    """Leak rates for irreps that sit entirely inside the Q block at this d.

    For such an irrep ``D-_lambda = 0``, so the restricted sums keep its
    component in the Q branch forever (an eigenvalue of Xi equal to
    ``tr(K Q K^dag Q Pi)/D+ = 1``).  The operator ``Q Pi_lambda = Pi_lambda`` is
    the same in either branch, so its split between branches is free; taking
    the d -> d0 limit of the generic-d rates keeps Xi continuous in d.
    """
    from .s4 import IRREPS, cycle_class

    d0 = 2 ** n_qubits
    tol = 0 if all(exact.is_exact(v) for v in h1) else 1e-9
    shifts = {}
    for lam in IRREPS:
        d_plus, d_minus = [], []
        h_hat, total = [], []
        for p, h1v in zip(PERMS, h1):
            pos = cycle_class(p).position
            w = Fraction(lam.dim * lam.chi(p), 24)
            d_plus = _poly_add(d_plus, _poly_scale(_Q_POLY[pos], w))
            h_hat = _poly_add(h_hat, _poly_scale(_Q_REST_POLY[pos], w * h1v))
            total = _poly_add(total, _poly_scale([0] * p.n_cycles + [1], w))
        d_minus = _poly_add(total, _poly_scale(d_plus, -1))
        if _poly_eval(total, d0) == 0 or _poly_eval(d_plus, d0) == 0 or _poly_eval(d_minus, d0) != 0:
            continue
        if not any(c != 0 for c in d_minus):
            continue
        leak = _poly_add(d_plus, _poly_scale(h_hat, -1))
        shifts[lam] = _limit_ratio(leak, d_minus, d0, tol)
    return shifts


def _isotypic_projector(lam, kind: str) -> GroupMatrix:
    """Projector onto the lambda-isotypic block: entries ``(d_lambda/24) chi(pi sigma^-1)``."""
    from .s4 import inverse

    data = np.empty((24, 24), dtype=object if kind == "exact" else float)
    for i, a in enumerate(PERMS):
        for j, b in enumerate(PERMS):
            v = Fraction(lam.dim * lam.chi(a * inverse(b)), 24)
            data[i, j] = v if kind == "exact" else float(v)
    return GroupMatrix(data, kind)


def f_pm_theta(theta: float, d: int):
    """Contraction factors ``(f+, f-)`` of one ``P_theta`` doping step."""
    if d < 2:
        raise ValueError("d must be at least 2")
    c4 = exact.cos4(theta)
    d = Fraction(d) if exact.is_exact(c4) else float(d)
    den = 8 * (d * d - 1)
    plus = (7 * d * d + 3 * d + d * (d - 3) * c4 - 8) / den
    minus = (7 * d * d - 3 * d + d * (d + 3) * c4 - 8) / den
    return plus, minus


def expected_spectrum(theta: float, d: int) -> list:
    """Nonzero eigenvalues of Xi: ``f+, f-`` and four copies of their mean."""
    fp, fm = f_pm_theta(theta, d)
    return [fp, fm] + [(fp + fm) / 2] * 4


def xi_power(sys: XiSystem, k: int) -> GroupMatrix:
    """``Xi^k``: exact repeated squaring up to k = 64, float eigendecomposition beyond."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if sys.kind == "exact" and k <= EXACT_POWER_LIMIT:
        return sys.xi.power(k)
    vals, vecs = np.linalg.eigh(sys.xi.array())
    return GroupMatrix((vecs * vals ** k) @ vecs.T, "float")


def gamma_k(sys: XiSystem, k) -> GroupMatrix:
    """``Gamma^(k) = Lambda sum_{i<k} Xi^i``; ``k = math.inf`` gives ``Lambda (1 - Xi)^-1``."""
    if k == math.inf:
        if sys.is_clifford_gate or _has_unit_eigenvalue(sys):
            raise ValueError("Xi has a unit eigenvalue (Clifford doping gate): the k -> infinity limit does not exist")
        one = GroupMatrix.identity(sys.kind)
        return sys.lam @ (one - sys.xi).inverse()
    if k < 0 or int(k) != k:
        raise ValueError("k must be a non-negative integer or math.inf")
    k = int(k)
    if sys.kind == "exact" and k <= EXACT_POWER_LIMIT:
        acc = GroupMatrix.zeros("exact")
        power = GroupMatrix.identity("exact")
        for _ in range(k):
            acc = acc + power
            power = power @ sys.xi
        return sys.lam @ acc
    vals, vecs = np.linalg.eigh(sys.xi.array())
    geo = np.array([k if abs(v - 1) < 1e-13 else (1 - v ** k) / (1 - v) for v in vals])
    return GroupMatrix(sys.lam.array() @ ((vecs * geo) @ vecs.T), "float")


def _has_unit_eigenvalue(sys: XiSystem) -> bool:
    return bool(np.any(np.abs(sys.eigenvalues() - 1) < 1e-12))


# ------------------------------------------------------------ channel output

@dataclass(frozen=True, eq=False)
class ChannelCoeffs:
    """``Phi(O) = sum_s gamma[s] Q T_s + beta[s] T_s`` with s in canonical order."""

    gamma: np.ndarray
    beta: np.ndarray
    n_qubits: int
    k: int | float
    theta: float | None

    @property
    def d(self) -> int:
        return 2 ** self.n_qubits

    @property
    def is_exact(self) -> bool:
        return self.gamma.dtype == object and self.beta.dtype == object

    def coeff(self, s: Perm4, branch: str):
        """Coefficient of ``Q T_s`` (``branch="Q"``) or ``T_s`` (``branch="plain"``)."""
        vec = {"Q": self.gamma, "plain": self.beta}[branch]
        return vec[s.index]

    def advance(self, sys: XiSystem, steps: int = 1) -> "ChannelCoeffs":
        """Apply further doping steps (each: K conjugation then a Clifford twirl)."""
        if sys.n_qubits != self.n_qubits:
            raise ValueError("Xi system built for a different qubit count")
        gamma, beta = self.gamma, self.beta
        for _ in range(steps):
            gamma, beta = sys.xi @ gamma, beta + sys.lam @ gamma
        return replace(self, gamma=_as_vec(gamma), beta=_as_vec(beta), k=self.k + steps)

    def trace_with(self, q_weights, t_weights):
        """``tr(A Phi(O))`` given ``q_weights[s] = tr(A Q T_s)`` and ``t_weights[s] = tr(A T_s)``."""
        return _dot(self.gamma, q_weights) + _dot(self.beta, t_weights)

    def total_trace(self):
        g = [q_value(p) ** self.n_qubits for p in PERMS]
        t = [self.d ** p.n_cycles for p in PERMS]
        return self.trace_with(g, t)

    def dense(self) -> np.ndarray:
        """Dense operator on 4 copies (N <= 2 only)."""
        if self.n_qubits > 2:
            raise ValueError("dense reconstruction is limited to N <= 2")
        q = dense_q(self.n_qubits)
        out = np.zeros((self.d ** 4,) * 2, dtype=complex)
        for i, p in enumerate(PERMS):
            t = perm_operator(p, self.d)
            out += complex(self.gamma[i]) * (q @ t) + complex(self.beta[i]) * t
        return out


def _as_vec(v) -> np.ndarray:
    v = np.asarray(v)
    if v.dtype == object and not all(exact.is_exact(x) for x in v):
        v = v.astype(complex)
    return v


def _dot(a, b):
    if np.asarray(a).dtype == object and all(exact.is_exact(x) for x in b):
        return sum((x * y for x, y in zip(a, b)), Fraction(0))
    return sum(complex(x) * complex(y) for x, y in zip(a, b))


def _trace_vectors(op, n_qubits: int):
    if isinstance(op, tuple) and len(op) == 2:
        qv, tv = op
        if len(qv) != 24 or len(tv) != 24:
            raise ValueError("trace vectors must have 24 entries each")
        return _normalise_vec(qv), _normalise_vec(tv)
    arr = np.asarray(op)
    d = 2 ** n_qubits
    if arr.shape != (d ** 4, d ** 4):
        raise ValueError(f"operator shape {arr.shape} is inconsistent with N={n_qubits}")
    if n_qubits > 2:
        raise ValueError("dense operators are accepted for N <= 2; pass trace vectors instead")
    qv, tv = operator_traces(arr, n_qubits)
    return qv, tv


def _normalise_vec(v):
    if all(exact.is_exact(x) for x in v):
        return np.array([Fraction(x) for x in v], dtype=object)
    return np.asarray([complex(x) for x in v], dtype=complex)


def clifford_coefficients(qv, tv, n_qubits: int):
    """Initial ``(c, b)`` of a Clifford twirl from the trace vectors."""
    w_plus, w_minus = clifford_weingarten_pm(2 ** n_qubits)
    exact_in = qv.dtype == object and tv.dtype == object
    if exact_in:
        leak = np.array([t - q for t, q in zip(tv, qv)], dtype=object)
        c = w_plus @ qv - w_minus @ leak
        b = w_minus @ leak
        return _as_vec(c), _as_vec(b)
    leak = tv - qv
    return w_plus.array() @ qv - w_minus.array() @ leak, w_minus.array() @ leak


def fold_channel_doped(op, k: int, theta: float | None, n_qubits: int,
                       k_gate: np.ndarray | None = None, system: XiSystem | None = None) -> ChannelCoeffs:
    """Fourth-moment channel of the k-doped Clifford circuit applied to ``op``.

    ``op`` is a dense operator on four copies (N <= 2) or a pair of 24-entry
    trace vectors ``(tr(O Q T_s), tr(O T_s))``.
    """
    if k < 0 or int(k) != k:
        raise ValueError("k must be a non-negative integer")
    qv, tv = _trace_vectors(op, n_qubits)
    c, b = clifford_coefficients(qv, tv, n_qubits)
    out = ChannelCoeffs(c, b, n_qubits, 0, theta)
    if k == 0:
        return out
    sys = system or build_xi_system(theta, n_qubits, k_gate)
    key = int(k)
    if key not in sys.cache:
        sys.cache[key] = (xi_power(sys, key), gamma_k(sys, key))
    xk, gk = sys.cache[key]
    if np.asarray(c).dtype != object:
        xk, gk = xk.array(), gk.array()
    gamma = xk @ c
    beta = b + gk @ c
    return ChannelCoeffs(_as_vec(gamma), _as_vec(beta), n_qubits, k, theta)


def fold_channel_haar(op, n_qubits: int) -> ChannelCoeffs:
    """Haar fourth-moment channel: plain-branch coefficients ``W t``."""
    d = 2 ** n_qubits
    w = unitary_weingarten(d)
    _, tv = _trace_vectors(op, n_qubits)
    beta = _as_vec(w @ tv) if tv.dtype == object else w.array() @ tv
    zero = np.array([Fraction(0)] * 24, dtype=object) if tv.dtype == object else np.zeros(24)
    return ChannelCoeffs(zero, beta, n_qubits, math.inf, None)


def haar_limit_coefficients(op, theta: float, n_qubits: int) -> ChannelCoeffs:
    """The k -> infinity channel computed from ``Gamma^(inf)`` (no Haar formula used)."""
    qv, tv = _trace_vectors(op, n_qubits)
    c, b = clifford_coefficients(qv, tv, n_qubits)
    sys = build_xi_system(theta, n_qubits)
    beta = b + gamma_k(sys, math.inf) @ c
    zero = np.zeros(24, dtype=object if np.asarray(beta).dtype == object else float)
    if zero.dtype == object:
        zero[:] = Fraction(0)
    return ChannelCoeffs(zero, _as_vec(beta), n_qubits, math.inf, theta)


# ------------------------------------------------------------ pure states

def c_q_coefficients(theta: float, d: int):
    """``(c_Q, c_QQperp)`` for ``K = P_theta`` in closed form."""
    c4 = exact.cos4(theta)
    dd = Fraction(d) if exact.is_exact(c4) else float(d)
    c_q = (dd + 2) * (4 + 7 * dd + (4 + dd) * c4) / 48
    c_qp = (dd + 2) * (dd + 4) * exact.sin2_2theta(theta) / 24
    return c_q, c_qp


def c_q_coefficients_bruteforce(sys: XiSystem):
    """``(tr(K Q K^dag Q Pi_sym), tr(K Q K^dag Q_perp Pi_sym))`` from the factorised traces."""
    n = sys.n_qubits
    c_q = sum(sys.h, Fraction(0) if sys.kind == "exact" else 0.0) / 24
    total = sum(Fraction(q_value(p) ** n) for p in PERMS) / 24
    return c_q, total - c_q


def _trq_from_spec(state_spec, n_qubits: int):
    if isinstance(state_spec, (int, Fraction, float)) and not isinstance(state_spec, bool):
        return state_spec
    if isinstance(state_spec, str):
        if state_spec in ("zero", "stabilizer", "stabilizer-zero"):
            return Fraction(1, 2 ** n_qubits)
        if state_spec == "random-product":
            return Fraction(2, 5) ** n_qubits
        raise ValueError(f"unknown state class {state_spec!r}")
    return trace_psi4_Q(state_spec)


def state_channel(state_spec, k, theta: float, n_qubits: int):
    """``(a_k, b_k)`` with ``Phi(psi^4) = a_k Q Pi_sym + b_k Pi_sym``.

    ``state_spec`` is a value of ``tr(psi^4 Q)``, a state-class name
    (``"zero"``, ``"random-product"`` for the local-Haar average) or a state
    accepted by :func:`trace_psi4_Q`.  ``k = math.inf`` returns the Haar limit.
    """
    d = 2 ** n_qubits
    trq = _trq_from_spec(state_spec, n_qubits)
    d_plus, d_minus = d_pm_lambda(SYM, n_qubits)
    if k == math.inf:
        if exact.cos4(theta) == 1:
            raise ValueError("Clifford doping gate: no k -> infinity limit")
        return Fraction(0), Fraction(1, sym_trace(d))
    c_q, c_qp = c_q_coefficients(theta, d)
    a0 = trq / d_plus - (1 - trq) / d_minus
    ratio = c_q / d_plus - c_qp / d_minus
    a = [a0 * ratio ** i for i in range(int(k) + 1)]
    b = (1 - trq) / d_minus + c_qp / d_minus * sum(a[:-1], Fraction(0) if exact.is_exact(a0 * ratio) else 0.0)
    return a[-1], b


def state_channel_closed(trq, k, theta: float, d: int):
    """Phase-gate specialisation: ``(a_k, b_k)`` written with ``f-^k``."""
    _, fm = f_pm_theta(theta, d)
    fk = 0 if k == math.inf else fm ** k
    pref = Fraction(24, (d * d - 1) * (d + 2) * (d + 4))
    a = pref * (Fraction(d * (d + 3), 4) * trq - 1) * fk
    b = Fraction(1, sym_trace(d)) + pref * (Fraction(4, d * (d + 3)) - trq) * fk
    return a, b


def psi4_trace_vectors(trq, n_qubits: int):
    """Trace vectors of ``psi^4``: ``tr(psi^4 Q T_s) = tr(psi^4 Q)`` and ``tr(psi^4 T_s) = 1``."""
    if exact.is_exact(trq):
        return [Fraction(trq)] * 24, [Fraction(1)] * 24
    return [float(trq)] * 24, [1.0] * 24


# ------------------------------------------------------------ k -> infinity

def kernel_vectors() -> list[np.ndarray]:
    """Indicator vectors of the six Klein-group cosets."""
    out = []
    for coset in klein_cosets():
        v = np.array([Fraction(0)] * 24, dtype=object)
        for p in coset:
            v[p.index] = Fraction(1)
        out.append(v)
    return out


def zeta_matrix(sys: XiSystem) -> GroupMatrix:
    one = GroupMatrix.identity(sys.kind)
    resolvent = sys.lam @ (one - sys.xi).inverse()
    return resolvent @ (sys.w_plus + sys.w_minus) - sys.w_minus


def verify_convergence_structure(theta: float, d: int, n_random: int = 20, k_check: int = 60,
                                 seed: int = 0) -> dict:
    """Check the k -> infinity identities and report every sub-check."""
    n = d.bit_length() - 1
    if 2 ** n != d or d < 4:
        raise ValueError("d must be a power of two with d >= 4")
    sys = build_xi_system(theta, n)
    if _has_unit_eigenvalue(sys):
        raise ValueError("Clifford doping gate: Xi has a unit eigenvalue")
    report: dict = {"theta": theta, "d": d, "exact": sys.kind == "exact"}
    one = GroupMatrix.identity(sys.kind)
    resolvent = sys.lam @ (one - sys.xi).inverse()
    lhs = sys.w_minus - resolvent @ sys.w_minus
    w = unitary_weingarten(d)
    report["haar_identity"] = {"passed": lhs.equals(w, 0.0 if sys.kind == "exact" else 1e-12),
                               "max_dev": lhs.max_abs_diff(w)}
    zeta = resolvent @ (sys.w_plus + sys.w_minus) - sys.w_minus
    dev = max(float(np.max(np.abs(np.asarray(zeta @ e, dtype=float)))) for e in kernel_vectors())
    report["kernel_vectors"] = {"passed": dev <= 1e-10, "max_dev": dev}
    rng = np.random.default_rng(seed)
    qdev = 0.0
    for _ in range(n_random):
        qv, _ = random_operator_traces(n, rng)
        qdev = max(qdev, float(np.max(np.abs(zeta.array() @ qv))) / max(1.0, float(np.max(np.abs(qv)))))
    report["q_vectors"] = {"passed": qdev <= 1e-10, "max_dev": qdev, "count": n_random}
    if n == 2:
        cdev = 0.0
        for _ in range(n_random):
            op = rng.normal(size=(256, 256)) + 1j * rng.normal(size=(256, 256))
            qv, tv = operator_traces(op, 2)
            doped = fold_channel_doped((qv, tv), k_check, theta, 2, system=sys)
            haar = fold_channel_haar((qv, tv), 2)
            scale = max(1.0, float(np.max(np.abs(tv))))
            cdev = max(cdev, float(np.max(np.abs(doped.dense() - haar.dense()))) / scale)
        fp, _ = f_pm_theta(theta, d)
        bound = float(fp) ** k_check * 1e3
        report["haar_limit_k"] = {"passed": cdev <= max(bound, 1e-8), "max_dev": cdev, "k": k_check}
    report["passed"] = all(v["passed"] for v in report.values() if isinstance(v, dict))
    return report


def random_operator_traces(n_qubits: int, rng: np.random.Generator, terms: int = 40):
    """Trace vectors of a random operator on four copies.

    N <= 2 uses a dense Gaussian operator; larger N uses a random combination of
    tensor products of Pauli strings, whose traces factorise per qubit.
    """
    if n_qubits <= 2:
        d = 2 ** n_qubits
        op = rng.normal(size=(d ** 4, d ** 4)) + 1j * rng.normal(size=(d ** 4, d ** 4))
        return operator_traces(op, n_qubits)
    from .pauli import PauliString, pauli4_traces

    qv = np.zeros(24, dtype=complex)
    tv = np.zeros(24, dtype=complex)
    for _ in range(terms):
        ps = tuple(PauliString("".join(rng.choice(list("IXYZ"), size=n_qubits))) for _ in range(4))
        w = rng.normal() + 1j * rng.normal()
        pq, pt = pauli4_traces(ps)
        qv += w * np.array([complex(x) for x in pq])
        tv += w * np.array([complex(x) for x in pt])
    return qv, tv


__all__ = [
    "XiSystem", "ChannelCoeffs", "build_xi_system", "f_pm_theta", "expected_spectrum", "xi_power",
    "gamma_k", "fold_channel_doped", "fold_channel_haar", "haar_limit_coefficients", "state_channel",
    "state_channel_closed", "c_q_coefficients", "c_q_coefficients_bruteforce", "kernel_vectors",
    "zeta_matrix", "verify_convergence_structure", "single_qubit_h", "single_qubit_h_dense",
    "phase_gate", "psi4_trace_vectors", "clifford_coefficients", "random_operator_traces",
]
