"""Exact scalar and small-matrix helpers (Fraction entries in object arrays)."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# cos(q*pi) is rational only for q in (1/3)Z or (1/2)Z (Niven); values are 0, +-1/2, +-1.
_RATIONAL_COS = {
    0: Fraction(1), 1: Fraction(1, 2), 2: Fraction(-1, 2), 3: Fraction(-1),
    4: Fraction(-1, 2), 5: Fraction(1, 2),
}


def exact_cos(x: float, tol: float = 1e-12):
    """Return ``cos(x)`` as a Fraction when it is rational, otherwise as a float."""
    for denom, table in ((3, _RATIONAL_COS), (2, None)):
        q = x / math.pi * denom
        n = round(q)
        if abs(q - n) < tol:
            if table is not None:
                return table[n % 6]
            return Fraction(0) if n % 2 else Fraction(1 if n % 4 == 0 else -1)
    return math.cos(x)


def cos4(theta: float):
    return exact_cos(4 * theta)


def sin2_2theta(theta: float):
    """``sin^2(2 theta) = (1 - cos 4 theta) / 2``, exact when cos 4 theta is rational."""
    return (1 - cos4(theta)) / 2


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def as_float_array(a) -> np.ndarray:
    return np.asarray(a, dtype=object).astype(float) if np.asarray(a).dtype == object else np.asarray(a, dtype=float)


def identity(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = Fraction(int(i == j))
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def inverse(a: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse over the rationals."""
    n = a.shape[0]
    x = np.array([[Fraction(v) for v in row] for row in a], dtype=object)
    y = identity(n)
    for col in range(n):
        piv = next((r for r in range(col, n) if x[r, col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        if piv != col:
            x[[col, piv]] = x[[piv, col]]
            y[[col, piv]] = y[[piv, col]]
        p = x[col, col]
        x[col] = x[col] / p
        y[col] = y[col] / p
        for r in range(n):
            if r != col and x[r, col] != 0:
                f = x[r, col]
                x[r] = x[r] - f * x[col]
                y[r] = y[r] - f * y[col]
    return y


def rank(a: np.ndarray) -> int:
    x = np.array([[Fraction(v) for v in row] for row in a], dtype=object)
    rows, cols = x.shape
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if x[i, col] != 0), None)
        if piv is None:
            continue
        x[[r, piv]] = x[[piv, r]]
        for i in range(r + 1, rows):
            if x[i, col] != 0:
                x[i] = x[i] - x[i, col] / x[r, col] * x[r]
        r += 1
        if r == rows:
            break
    return r


def to_fraction(z, tol: float = 1e-9):
    """Convert an exactly-integral complex/float value (as produced by Pauli traces) to Fraction."""
    z = complex(z)
    if abs(z.imag) > tol:
        raise ValueError(f"value {z} is not real")
    n = round(z.real)
    if abs(z.real - n) > tol:
        raise ValueError(f"value {z} is not an integer")
    return Fraction(n)
