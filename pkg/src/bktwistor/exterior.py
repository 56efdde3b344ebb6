"""Graded exterior algebra of V + W.

A degree-d element is stored densely over the reduced index sets of the
ambient positions ``0..l`` (V) and ``l+1..l+m+1`` (W), i.e. over the
d-subsets of ``range(l + m + 2)`` in lexicographic order.  The (a, b)
component is the part with a V-positions and b W-positions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import exact
from .errors import DimensionError, RankError
from .indices import MultiIndex, normalize_keys
from .kernels import plucker_max_residual
from .linalg import SpacePair


# ---------------------------------------------------------------- tables


@lru_cache(maxsize=None)
def combos(n_pos: int, d: int) -> tuple:
    return tuple(itertools.combinations(range(n_pos), d))


@lru_cache(maxsize=None)
def combo_masks(n_pos: int, d: int) -> np.ndarray:
    return np.array([sum(1 << p for p in c) for c in combos(n_pos, d)], dtype=np.int64)


@lru_cache(maxsize=None)
def mask_index(n_pos: int) -> np.ndarray:
    """Slot of every subset bitmask inside its own degree's ordering."""
    table = np.full(1 << n_pos, -1, dtype=np.int64)
    for d in range(n_pos + 1):
        table[combo_masks(n_pos, d)] = np.arange(len(combos(n_pos, d)))
    return table


@lru_cache(maxsize=None)
def wedge_table(n_pos: int, d: int):
    """(src, pos, tgt, sign) with e_pos ^ e_src = sign * e_tgt."""
    index = mask_index(n_pos)
    src, pos, tgt, sgn = [], [], [], []
    for ci, c in enumerate(combos(n_pos, d)):
        cm = sum(1 << q for q in c)
        for p in range(n_pos):
            if cm >> p & 1:
                continue
            below = sum(1 for q in c if q < p)
            src.append(ci)
            pos.append(p)
            tgt.append(index[cm | (1 << p)])
            sgn.append(-1 if below % 2 else 1)
    return (np.array(src, dtype=np.int64), np.array(pos, dtype=np.int64),
            np.array(tgt, dtype=np.int64), np.array(sgn, dtype=np.int64))


@lru_cache(maxsize=None)
def v_degrees(l: int, m: int, d: int) -> np.ndarray:
    return np.array([sum(1 for p in c if p <= l) for c in combos(l + m + 2, d)], dtype=np.int64)


@lru_cache(maxsize=None)
def zero_free(l: int, m: int, d: int) -> np.ndarray:
    """Mask of index sets avoiding both affine positions 0 and 0'."""
    w0 = l + 1
    return np.array([0 not in c and w0 not in c for c in combos(l + m + 2, d)])


# ---------------------------------------------------------------- tensor


def _zeros_like_kind(n: int, exact_mode: bool):
    return exact.zeros(n) if exact_mode else np.zeros(n, dtype=complex)


@dataclass
class GradedTensor:
    space: SpacePair
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        n_pos = self.space.ambient
        if not 0 <= self.degree <= n_pos:
            raise DimensionError("degree out of range")
        if len(self.coeffs) != len(combos(n_pos, self.degree)):
            raise DimensionError("coefficient array has the wrong length")

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, space: SpacePair, degree: int, exact_mode: bool = False) -> "GradedTensor":
        n = len(combos(space.ambient, degree))
        return cls(space, degree, _zeros_like_kind(n, exact_mode))

    @classmethod
    def scalar(cls, space: SpacePair, value=1.0) -> "GradedTensor":
        if isinstance(value, exact.QQ_I.dtype):
            arr = exact.zeros(1)
            arr[0] = value
            return cls(space, 0, arr)
        return cls(space, 0, np.array([value], dtype=complex))

    @classmethod
    def basis(cls, space: SpacePair, positions, exact_mode: bool = False) -> "GradedTensor":
        """The wedge of ambient basis vectors at ``positions`` (in that order)."""
        sign, red = normalize_keys(list(positions))
        if len(red) != len(positions):
            raise DimensionError("repeated basis vector in an exterior product")
        t = cls.zeros(space, len(red), exact_mode)
        mask = sum(1 << p for p in red)
        t.coeffs[mask_index(space.ambient)[mask]] = exact.q(sign) if exact_mode else sign
        return t

    @classmethod
    def from_entries(cls, space: SpacePair, degree: int, entries, exact_mode: bool = False):
        """``entries``: iterable of ((I, J), c) with I over 0..l, J over 0..m.

        Non-reduced (I, J) are allowed; their sign is applied.
        """
        t = cls.zeros(space, degree, exact_mode)
        index = mask_index(space.ambient)
        for (I, J), c in entries:
            sign, red = normalize_keys([space.vpos(i) for i in I] + [space.wpos(j) for j in J])
            if len(red) != degree:
                raise DimensionError("entry has the wrong reduced degree")
            mask = sum(1 << p for p in red)
            t.coeffs[index[mask]] = t.coeffs[index[mask]] + (sign * c)
        return t

    # access ---------------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return exact.is_exact(self.coeffs)

    def _split(self, positions) -> tuple:
        l = self.space.l
        return (tuple(p for p in positions if p <= l),
                tuple(p - l - 1 for p in positions if p > l))

    def coeff(self, I=(), J=()):
        """Coefficient z^{IJ'} for arbitrary (possibly non-reduced) words.

        Words follow the contraction convention, so repeats give a signed
        value rather than zero.
        """
        keys = [self.space.vpos(i) for i in I] + [self.space.wpos(j) for j in J]
        return self.coeff_positions(keys)

    def coeff_positions(self, positions):
        sign, red = normalize_keys(list(positions))
        if len(red) != self.degree:
            return exact.ZERO if self.is_exact else 0.0
        mask = sum(1 << p for p in red)
        val = self.coeffs[mask_index(self.space.ambient)[mask]]
        return val if sign == 1 else -val

    def coeff_multi(self, index: MultiIndex):
        return self.coeff(index.v, index.w)

    def entries(self, tol: float = 0.0):
        """Yield ((I, J), c) over reduced index pairs with |c| > tol."""
        for c, val in zip(combos(self.space.ambient, self.degree), self.coeffs):
            if self.is_exact:
                if not val:
                    continue
            elif abs(val) <= tol:
                continue
            yield self._split(c), val

    def component(self, a: int, b: int) -> "GradedTensor":
        return graded_component(self, a, b)

    # arithmetic -------------------------------------------------------------
    def _check(self, other):
        if self.space != other.space or self.degree != other.degree:
            raise DimensionError("ambient or degree mismatch")

    def __add__(self, other):
        self._check(other)
        return GradedTensor(self.space, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return GradedTensor(self.space, self.degree, self.coeffs - other.coeffs)

    def __neg__(self):
        return GradedTensor(self.space, self.degree, -self.coeffs)

    def __mul__(self, scalar):
        return GradedTensor(self.space, self.degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return GradedTensor(self.space, self.degree, self.coeffs / scalar)

    def to_complex(self) -> "GradedTensor":
        return GradedTensor(self.space, self.degree, exact.to_complex(self.coeffs))

    def norm(self) -> float:
        return float(np.linalg.norm(exact.to_complex(self.coeffs)))

    def max_abs(self) -> float:
        arr = exact.to_complex(self.coeffs)
        return float(np.max(np.abs(arr))) if arr.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.is_exact:
            return not any(bool(v) for v in self.coeffs)
        return self.max_abs() <= tol

    def vector(self) -> np.ndarray:
        return exact.to_complex(self.coeffs)

    # serialization --------------------------------------------------------
    def to_json(self) -> list:
        out = []
        for (I, J), c in self.entries():
            val = exact.to_json_scalar(c) if self.is_exact else [float(c.real), float(c.imag)]
            out.append({"I": list(I), "J": list(J), "c": val})
        return out

    @classmethod
    def from_json(cls, space: SpacePair, degree: int, items, exact_mode: bool = False):
        entries = []
        for item in items:
            re, im = item["c"]
            c = exact.to_exact((re, im)) if exact_mode else complex(float(re), float(im))
            entries.append(((tuple(item["I"]), tuple(item["J"])), c))
        return cls.from_entries(space, degree, entries, exact_mode)


# ---------------------------------------------------------------- operations


def wedge_vector(v, t: GradedTensor) -> GradedTensor:
    """v ^ t for an ambient vector v (use SpacePair.embed for V- or W-vectors)."""
    n_pos = t.space.ambient
    if len(v) != n_pos:
        raise DimensionError("vector does not live in the tensor's ambient space")
    exact_mode = t.is_exact or exact.is_exact(v)
    out = GradedTensor.zeros(t.space, t.degree + 1, exact_mode)
    if t.degree == n_pos:
        return out
    src, pos, tgt, sgn = wedge_table(n_pos, t.degree)
    if exact_mode:
        v = exact.array(v)
        coeffs = t.coeffs if t.is_exact else exact.array(t.coeffs)
        acc = out.coeffs
        for s, p, g, sg in zip(src, pos, tgt, sgn):
            if v[p] and coeffs[s]:
                acc[g] = acc[g] + int(sg) * v[p] * coeffs[s]
        return out
    np.add.at(out.coeffs, tgt, sgn * np.asarray(v)[pos] * t.coeffs[src])
    return out


def interior_conjugate(v, t: GradedTensor, form_diag=None) -> GradedTensor:
    """i(v̄) t: left contraction with the functional u -> (u, v).

    ``form_diag`` defaults to G + H; pass all-ones for the definite form.
    """
    n_pos = t.space.ambient
    if len(v) != n_pos:
        raise DimensionError("vector does not live in the tensor's ambient space")
    if form_diag is None:
        form_diag = t.space.form_diagonal()
    exact_mode = t.is_exact or exact.is_exact(v)
    if t.degree == 0:
        return GradedTensor.zeros(t.space, 0, exact_mode)
    out = GradedTensor.zeros(t.space, t.degree - 1, exact_mode)
    src, pos, tgt, sgn = wedge_table(n_pos, t.degree - 1)
    if exact_mode:
        f = exact.conj(exact.array(v))
        coeffs = t.coeffs if t.is_exact else exact.array(t.coeffs)
        acc = out.coeffs
        for s, p, g, sg in zip(src, pos, tgt, sgn):
            if f[p] and coeffs[g]:
                acc[s] = acc[s] + int(sg) * int(form_diag[p]) * f[p] * coeffs[g]
        return out
    f = np.asarray(form_diag) * np.conj(np.asarray(v))
    np.add.at(out.coeffs, src, sgn * f[pos] * t.coeffs[tgt])
    return out


def graded_component(t: GradedTensor, a: int, b: int) -> GradedTensor:
    if a + b != t.degree:
        raise DimensionError(f"component ({a},{b}) does not have degree {t.degree}")
    keep = v_degrees(t.space.l, t.space.m, t.degree) == a
    coeffs = t.coeffs.copy()
    if t.is_exact:
        coeffs[~keep] = exact.ZERO
    else:
        coeffs[~keep] = 0
    return GradedTensor(t.space, t.degree, coeffs)


def plucker_of_subspace(basis, space: SpacePair) -> GradedTensor:
    """Λ^k of the column span of ``basis`` (ambient × k)."""
    exact_mode = exact.is_exact(basis)
    if not exact_mode:
        basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != space.ambient:
        raise DimensionError("basis must be an ambient x k matrix")
    k = basis.shape[1]
    cs = combos(space.ambient, k)
    if k == 0:
        return GradedTensor.scalar(space, exact.ONE if exact_mode else 1.0)
    if exact_mode:
        coeffs = exact.zeros(len(cs))
        for i, c in enumerate(cs):
            coeffs[i] = exact.det(basis[list(c), :])
        t = GradedTensor(space, k, coeffs)
        if t.is_zero():
            raise RankError("basis is rank deficient")
        return t
    rows = np.array(cs, dtype=np.int64)
    coeffs = np.linalg.det(basis[rows, :])
    t = GradedTensor(space, k, coeffs.astype(complex))
    if t.max_abs() <= 1e-14 * max(1.0, np.linalg.norm(basis)) ** k:
        raise RankError("basis is rank deficient")
    return t


def plucker_relations_exact(t: GradedTensor) -> list:
    """Every quadratic Plücker relation evaluated exactly."""
    n_pos, k = t.space.ambient, t.degree
    out = []
    for lo in combos(n_pos, k - 1) if k >= 1 else ():
        for hi in combos(n_pos, k + 1):
            acc = exact.ZERO
            for r, j in enumerate(hi):
                acc = acc + (-1) ** r * t.coeff_positions(list(lo) + [j]) * t.coeff_positions(
                    [q for q in hi if q != j])
            out.append(acc)
    return out


def plucker_residual(t: GradedTensor) -> float:
    """Max |relation| / max|z|^2 over all quadratic Plücker relations.

    Zero exactly when t is decomposable (up to rounding in float mode).
    """
    if t.is_zero():
        raise RankError("zero tensor: Plücker residual undefined")
    n_pos, k = t.space.ambient, t.degree
    if k <= 1 or k >= n_pos - 1:
        return 0.0
    if t.is_exact:
        rels = plucker_relations_exact(t)
        worst = max((abs(complex(*map(float, (exact.real_part(r), exact.imag_part(r)))))
                     for r in rels if r), default=0.0)
        return worst / t.max_abs() ** 2
    z = np.ascontiguousarray(t.coeffs, dtype=np.complex128)
    worst = plucker_max_residual(z, mask_index(n_pos), combo_masks(n_pos, k - 1),
                                 combo_masks(n_pos, k + 1), n_pos)
    return float(worst) / t.max_abs() ** 2


def lambda_form(s: GradedTensor, t: GradedTensor, form_diag=None):
    """Induced form on Λ^d: (e_I, e_J) = δ_IJ Π_{p in I} F_pp."""
    s._check(t)
    if form_diag is None:
        form_diag = s.space.form_diagonal()
    weights = np.array([np.prod([form_diag[p] for p in c]) for c in
                        combos(s.space.ambient, s.degree)])
    return complex(np.sum(weights * s.vector() * np.conj(t.vector())))


def lambda_power(mat: np.ndarray, d: int) -> np.ndarray:
    """Matrix of Λ^d(mat) in the lexicographic basis (minors)."""
    mat = np.asarray(mat, dtype=complex)
    n_pos = mat.shape[0]
    cs = combos(n_pos, d)
    if d == 0:
        return np.ones((1, 1), dtype=complex)
    rows = np.array(cs, dtype=np.int64)
    sub = mat[rows[:, None, :, None], rows[None, :, None, :]]
    return np.linalg.det(sub)


def apply_linear(mat: np.ndarray, t: GradedTensor) -> GradedTensor:
    return GradedTensor(t.space, t.degree, lambda_power(mat, t.degree) @ t.vector())
