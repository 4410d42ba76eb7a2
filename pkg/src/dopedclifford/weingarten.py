"""Fourth-moment Weingarten matrices for the unitary and Clifford groups.

Both are class functions of the product ``pi * sigma``:

    W_{pi sigma}   = sum_lambda  d_lambda^3 chi^lambda(pi sigma) / (576 D_lambda)
    W^+-_{pi sigma} = same sum with D_lambda -> D^+-_lambda, skipping D^+-_lambda = 0

with ``D_lambda = tr Pi_lambda`` and ``D^+_lambda = tr(Q Pi_lambda)``.  The cubed
irrep dimension is what makes ``W`` the inverse of the Gram matrix
``G_{tau sigma} = tr(T_tau T_sigma) = d^{#cycles(tau sigma)}``; the restricted
``W^+-`` are the corresponding (pseudo-)inverses on the Q and Q-perp blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import exact
from .pauli import d_pm_lambda
from .s4 import INDEX, IRREPS, PERMS, Perm4, class_positions, irrep_trace, product_table

KINDS = ("exact", "float")


@dataclass(frozen=True, eq=False)
class GroupMatrix:
    """A 24x24 matrix indexed by pairs of permutations in the canonical order.

    ``kind`` is ``"exact"`` for Fraction entries (object array) and ``"float"``
    otherwise.  Arithmetic between an exact and a float matrix yields float.
    """

    data: np.ndarray
    kind: str = "float"

    def __post_init__(self):
        if self.data.shape != (24, 24):
            raise ValueError(f"group matrix must be 24x24, got {self.data.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown scalar kind {self.kind!r}")

    @classmethod
    def from_class_function(cls, values, kind: str | None = None) -> "GroupMatrix":
        """Matrix ``M_{pi sigma} = f(pi * sigma)`` from the 24 values of ``f`` in canonical order."""
        values = list(values)
        if kind is None:
            kind = "exact" if all(exact.is_exact(v) for v in values) else "float"
        arr = np.array(values, dtype=object if kind == "exact" else float)
        return cls(arr[product_table()], kind)

    @classmethod
    def zeros(cls, kind: str = "exact") -> "GroupMatrix":
        return cls(exact.zeros((24, 24)) if kind == "exact" else np.zeros((24, 24)), kind)

    @classmethod
    def identity(cls, kind: str = "exact") -> "GroupMatrix":
        return cls(exact.identity(24) if kind == "exact" else np.eye(24), kind)

    def __getitem__(self, key):
        i, j = key
        if isinstance(i, Perm4):
            i = INDEX[i]
        if isinstance(j, Perm4):
            j = INDEX[j]
        return self.data[i, j]

    def _coerce(self, other: "GroupMatrix"):
        if self.kind == other.kind:
            return self.data, other.data, self.kind
        return self.to_float().data, other.to_float().data, "float"

    def __matmul__(self, other):
        if isinstance(other, GroupMatrix):
            a, b, kind = self._coerce(other)
            if kind == "exact":
                return GroupMatrix(_exact_dot(a, b), kind)
            return GroupMatrix(a.dot(b), kind)
        vec = np.asarray(other)
        if self.kind == "exact" and vec.dtype == object:
            return self.data.dot(vec)
        return self.to_float().data @ vec

    def __add__(self, other: "GroupMatrix") -> "GroupMatrix":
        a, b, kind = self._coerce(other)
        return GroupMatrix(a + b, kind)

    def __sub__(self, other: "GroupMatrix") -> "GroupMatrix":
        a, b, kind = self._coerce(other)
        return GroupMatrix(a - b, kind)

    def __neg__(self) -> "GroupMatrix":
        return GroupMatrix(-self.data, self.kind)

    def scale(self, c) -> "GroupMatrix":
        kind = self.kind if exact.is_exact(c) else "float"
        base = self.data if kind == self.kind else self.to_float().data
        return GroupMatrix(base * c, kind)

    def to_float(self) -> "GroupMatrix":
        if self.kind == "float":
            return self
        return GroupMatrix(self.data.astype(float), "float")

    def array(self) -> np.ndarray:
        """Float copy of the entries."""
        return np.array(self.to_float().data, dtype=float)

    def transpose(self) -> "GroupMatrix":
        return GroupMatrix(self.data.T.copy(), self.kind)

    def power(self, k: int) -> "GroupMatrix":
        if k < 0:
            raise ValueError("negative matrix power")
        out, base = GroupMatrix.identity(self.kind), self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def inverse(self) -> "GroupMatrix":
        if self.kind == "exact":
            return GroupMatrix(exact.inverse(self.data), "exact")
        return GroupMatrix(np.linalg.inv(self.data), "float")

    def equals(self, other: "GroupMatrix", tol: float = 0.0) -> bool:
        if self.kind == other.kind == "exact" and tol == 0.0:
            return bool(np.all(self.data == other.data))
        return float(np.max(np.abs(self.array() - other.array()))) <= tol

    def max_abs_diff(self, other: "GroupMatrix") -> float:
        return float(np.max(np.abs(self.array() - other.array())))

    def is_class_function(self) -> bool:
        """True when every entry depends only on the cycle type of ``pi * sigma``."""
        cls = class_positions()[product_table()]
        for c in range(5):
            vals = self.data[cls == c]
            if self.kind == "exact":
                if any(v != vals[0] for v in vals):
                    return False
            elif np.ptp(vals.astype(float)) > 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
                return False
        return True

    def row_sums(self):
        return self.data.sum(axis=1)

    def __repr__(self):
        return f"GroupMatrix(kind={self.kind})"


def _integer_form(a: np.ndarray):
    """``(m, den)`` with ``a = m / den`` and ``m`` holding Python ints."""
    den = math.lcm(*(Fraction(x).denominator for x in a.flat))
    m = np.empty(a.shape, dtype=object)
    m.flat = [int(Fraction(x) * den) for x in a.flat]
    return m, den


def _exact_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # integer products avoid a gcd per Fraction operation
    ma, da = _integer_form(a)
    mb, db = _integer_form(b)
    prod = ma.dot(mb)
    den = da * db
    out = np.empty(prod.shape, dtype=object)
    out.flat = [Fraction(x, den) for x in prod.flat]
    return out


def _check_d(d: int):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")


def gram_matrix(d: int) -> GroupMatrix:
    """``G_{tau sigma} = tr(T_tau T_sigma) = d^{#cycles(tau sigma)}`` (exact)."""
    _check_d(d)
    return GroupMatrix.from_class_function([Fraction(d) ** p.n_cycles for p in PERMS], "exact")


def _character_sum(denoms: dict) -> GroupMatrix:
    values = []
    for p in PERMS:
        total = Fraction(0)
        for lam, dl in denoms.items():
            total += Fraction(lam.dim ** 3 * lam.chi(p), 576) / dl
        values.append(total)
    return GroupMatrix.from_class_function(values, "exact")


@lru_cache(maxsize=None)
def unitary_weingarten(d: int) -> GroupMatrix:
    """Haar Weingarten matrix for the fourth moment (exact rationals).

    Requires ``d >= 4``; below that the antisymmetric irrep vanishes and the
    Gram matrix is singular.
    """
    _check_d(d)
    if d < 4:
        raise ValueError(f"unitary Weingarten matrix needs d >= 4 (got d={d}): irrep [1,1,1,1] vanishes")
    return _character_sum({lam: irrep_trace(lam, d) for lam in IRREPS})


def _qubits(d: int) -> int:
    n = int(d).bit_length() - 1
    if d < 2 or 2 ** n != d:
        raise ValueError(f"Clifford Weingarten matrices need d = 2^N, got d={d}")
    return n


@lru_cache(maxsize=None)
def clifford_weingarten_pm(d: int) -> tuple[GroupMatrix, GroupMatrix]:
    """Generalised Clifford Weingarten matrices ``(W+, W-)`` for ``d = 2^N``."""
    n = _qubits(d)
    table = {lam: d_pm_lambda(lam, n) for lam in IRREPS}
    w_plus = _character_sum({lam: v[0] for lam, v in table.items() if v[0] != 0})
    w_minus = _character_sum({lam: v[1] for lam, v in table.items() if v[1] != 0})
    return w_plus, w_minus


def gram_inverse_oracle(d: int) -> GroupMatrix:
    """Independent route to ``W``: exact inversion of the Gram matrix."""
    if d < 4:
        raise ValueError("Gram matrix is singular for d < 4")
    return gram_matrix(d).inverse()


def sym_trace(d: int) -> int:
    """``D_sym = d(d+1)(d+2)(d+3)/24``."""
    return irrep_trace(IRREPS[0], d)


__all__ = [
    "GroupMatrix", "gram_matrix", "unitary_weingarten", "clifford_weingarten_pm",
    "gram_inverse_oracle", "sym_trace",
]
