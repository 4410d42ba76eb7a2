"""Symmetric group S4: permutations, characters and permutation operators.

Conventions used everywhere in the package:

* A permutation is stored as its image tuple ``(s(0), s(1), s(2), s(3))``
  on zero-based indices.
* Composition is ``(s * t)(i) = s(t(i))``.
* ``PERMS`` lists the 24 elements in lexicographic order of their image
  tuples; every 24x24 matrix in the package is indexed in this order.
* ``T_s`` moves the tensor factor in slot ``i`` to slot ``s(i)``, so that
  ``T_s T_t = T_{s*t}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

DENSE_LIMIT = 8 ** 4


@dataclass(frozen=True, order=True)
class Perm4:
    images: tuple[int, int, int, int]

    def __post_init__(self):
        if sorted(self.images) != [0, 1, 2, 3]:
            raise ValueError(f"not a permutation of 0..3: {self.images}")

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Perm4") -> "Perm4":
        return compose(self, other)

    @classmethod
    def from_cycles(cls, *cycles: tuple[int, ...]) -> "Perm4":
        """Build from one-based cycle notation, e.g. ``Perm4.from_cycles((1, 2), (3, 4))``."""
        img = list(range(4))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                img[a - 1] = b - 1
        return cls(tuple(img))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(4):
            if start in seen:
                continue
            cyc, j = [], start
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    @property
    def n_cycles(self) -> int:
        return len(self.cycles())

    @property
    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    @property
    def index(self) -> int:
        return INDEX[self]

    def __repr__(self):
        cyc = [c for c in self.cycles() if len(c) > 1]
        if not cyc:
            return "Perm4(e)"
        return "Perm4(" + "".join("(" + "".join(str(i + 1) for i in c) + ")" for c in cyc) + ")"


def compose(a: Perm4, b: Perm4) -> Perm4:
    return Perm4(tuple(a.images[b.images[i]] for i in range(4)))


def inverse(a: Perm4) -> Perm4:
    img = [0] * 4
    for i, j in enumerate(a.images):
        img[j] = i
    return Perm4(tuple(img))


PERMS: tuple[Perm4, ...] = tuple(Perm4(p) for p in itertools.permutations(range(4)))
INDEX: dict[Perm4, int] = {p: i for i, p in enumerate(PERMS)}
IDENTITY = PERMS[0]


@dataclass(frozen=True)
class CycleClass:
    tag: str
    cycle_type: tuple[int, ...]
    size: int
    position: int


CLASSES: tuple[CycleClass, ...] = (
    CycleClass("1^4", (1, 1, 1, 1), 1, 0),
    CycleClass("2.1^2", (2, 1, 1), 6, 1),
    CycleClass("2^2", (2, 2), 3, 2),
    CycleClass("3.1", (3, 1), 8, 3),
    CycleClass("4", (4,), 6, 4),
)
_CLASS_BY_TYPE = {c.cycle_type: c for c in CLASSES}


def cycle_class(a: Perm4) -> CycleClass:
    return _CLASS_BY_TYPE[a.cycle_type]


@dataclass(frozen=True)
class IrrepLabel:
    partition: tuple[int, ...]
    dim: int
    character: tuple[int, int, int, int, int]  # indexed by CycleClass.position

    @property
    def name(self) -> str:
        return "[" + ",".join(map(str, self.partition)) + "]"

    def chi(self, a: Perm4) -> int:
        return self.character[cycle_class(a).position]


SYM = IrrepLabel((4,), 1, (1, 1, 1, 1, 1))
IRREPS: tuple[IrrepLabel, ...] = (
    SYM,
    IrrepLabel((3, 1), 3, (3, 1, -1, 0, -1)),
    IrrepLabel((2, 2), 2, (2, 0, 2, -1, 0)),
    IrrepLabel((2, 1, 1), 3, (3, -1, -1, 0, 1)),
    IrrepLabel((1, 1, 1, 1), 1, (1, -1, 1, 1, -1)),
)
ANTISYM = IRREPS[-1]


def irrep(partition) -> IrrepLabel:
    partition = tuple(partition)
    for lam in IRREPS:
        if lam.partition == partition:
            return lam
    raise KeyError(partition)


def _check_character_table():
    assert sum(lam.dim ** 2 for lam in IRREPS) == 24
    assert sum(c.size for c in CLASSES) == 24
    for lam in IRREPS:
        for mu in IRREPS:
            s = sum(c.size * lam.character[c.position] * mu.character[c.position] for c in CLASSES)
            assert s == (24 if lam == mu else 0), (lam, mu)


_check_character_table()


@lru_cache(maxsize=None)
def product_table() -> np.ndarray:
    """``table[i, j]`` is the index of ``PERMS[i] * PERMS[j]``."""
    return np.array([[INDEX[compose(a, b)] for b in PERMS] for a in PERMS], dtype=np.intp)


def class_positions() -> np.ndarray:
    return np.array([cycle_class(p).position for p in PERMS], dtype=np.intp)


def klein_cosets() -> list[list[Perm4]]:
    """The six cosets of the Klein four-group {e, (12)(34), (13)(24), (14)(23)}."""
    klein = [p for p in PERMS if p.cycle_type in ((1, 1, 1, 1), (2, 2))]
    cosets, seen = [], set()
    for p in PERMS:
        if p in seen:
            continue
        coset = sorted(compose(p, v) for v in klein)
        seen.update(coset)
        cosets.append(coset)
    return cosets


def _check_dense(m: int):
    if m < 1:
        raise ValueError("local dimension must be positive")
    if m ** 4 > DENSE_LIMIT:
        raise ValueError(f"dense operator on ({m})^4 = {m ** 4} dims exceeds limit {DENSE_LIMIT}")


def perm_operator(s: Perm4, m: int) -> np.ndarray:
    """Dense ``T_s`` on four copies of an ``m``-dimensional space."""
    _check_dense(m)
    n = m ** 4
    digits = np.array(np.unravel_index(np.arange(n), (m,) * 4))
    out_digits = np.empty_like(digits)
    for i in range(4):
        out_digits[s(i)] = digits[i]
    rows = np.ravel_multi_index(tuple(out_digits), (m,) * 4)
    op = np.zeros((n, n))
    op[rows, np.arange(n)] = 1.0
    return op


def irrep_projector(lam: IrrepLabel, m: int) -> np.ndarray:
    _check_dense(m)
    out = sum(lam.chi(p) * perm_operator(p, m) for p in PERMS)
    return lam.dim / 24 * out


def irrep_trace(lam: IrrepLabel, m: int) -> int:
    """``tr(Pi_lambda)`` on four copies of C^m, without building the operator."""
    total = sum(Fraction(lam.chi(p)) * m ** p.n_cycles for p in PERMS) * lam.dim / 24
    assert total.denominator == 1
    return int(total)
