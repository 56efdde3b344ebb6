"""Gaussian-rational scalars for the exact backend.

Scalars are ``sympy`` ``QQ_I`` elements stored in ``dtype=object`` arrays, so
the same table-driven code paths run on floats and on exact values.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ_I

ZERO = QQ_I.zero
ONE = QQ_I.one


def q(re, im=0) -> "QQ_I.dtype":
    """Build an exact scalar from rationals (ints, Fractions or decimal strings)."""
    return QQ_I(QQ_I.dom.convert(Fraction(re)), QQ_I.dom.convert(Fraction(im)))


def to_exact(value):
    if isinstance(value, QQ_I.dtype):
        return value
    if isinstance(value, complex):
        return q(Fraction(value.real), Fraction(value.imag))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return q(Fraction(value[0]), Fraction(value[1]))
    return q(Fraction(value))


def array(values) -> np.ndarray:
    values = np.asarray(values, dtype=object)
    out = np.empty(values.shape, dtype=object)
    for idx, v in np.ndenumerate(values):
        out[idx] = to_exact(v)
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(ZERO)
    return out


def is_exact(arr) -> bool:
    return isinstance(arr, np.ndarray) and arr.dtype == object


def conj_scalar(a):
    if isinstance(a, QQ_I.dtype):
        return QQ_I(a.x, -a.y)
    return np.conj(a)


def conj(arr):
    if is_exact(arr):
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = conj_scalar(v)
        return out
    return np.conj(arr)


def real_part(a) -> Fraction:
    return Fraction(int(a.x.numerator), int(a.x.denominator))


def imag_part(a) -> Fraction:
    return Fraction(int(a.y.numerator), int(a.y.denominator))


def to_complex(arr) -> np.ndarray:
    if not is_exact(arr):
        return np.asarray(arr, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    for idx, v in np.ndenumerate(arr):
        out[idx] = complex(float(real_part(v)), float(imag_part(v)))
    return out


def det(mat: np.ndarray):
    """Determinant by Gaussian elimination over the Gaussian rationals."""
    a = [list(row) for row in mat]
    n = len(a)
    result = ONE
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return ZERO
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            result = -result
        p = a[col][col]
        result = result * p
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] / p
                a[r] = [a[r][c] - f * a[col][c] for c in range(n)]
    return result


def to_json_scalar(a) -> list:
    """Exact components serialize as decimal (rational) strings."""
    return [str(real_part(a)), str(imag_part(a))]
