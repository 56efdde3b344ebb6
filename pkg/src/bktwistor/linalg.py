"""Hermitian linear algebra on V = C^{l+1} (form G = diag(1, -I_l)) and
W = C^{m+1} (form H = I).

Vectors of the direct sum V + W are stored as length ``l + m + 2`` arrays,
V coordinates first.  All forms are sesquilinear and conjugate-linear in the
second slot: ``(v, w) = sum_i F_ii v_i conj(w_i)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import exact
from .errors import DegenerateSubspaceError, DimensionError, NotInBallError, RankError

RANK_TOL = 1e-10


class FormKind(enum.Enum):
    G = "G"  # indefinite, signature (1, l)
    H = "H"  # standard Hermitian


def form_diagonal(kind: FormKind, dim: int) -> np.ndarray:
    if kind is FormKind.G:
        return np.array([1.0] + [-1.0] * (dim - 1))
    return np.ones(dim)


@dataclass(frozen=True)
class SpacePair:
    """Dimensions of V = C^{l+1} and W = C^{m+1}."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or self.m < 0:
            raise DimensionError("l and m must be non-negative")

    @property
    def n(self) -> int:
        return self.l + self.m

    @property
    def dim_v(self) -> int:
        return self.l + 1

    @property
    def dim_w(self) -> int:
        return self.m + 1

    @property
    def ambient(self) -> int:
        return self.l + self.m + 2

    @property
    def v_slice(self) -> slice:
        return slice(0, self.l + 1)

    @property
    def w_slice(self) -> slice:
        return slice(self.l + 1, self.l + self.m + 2)

    @property
    def w0(self) -> int:
        """Ambient position of the affine index 0'."""
        return self.l + 1

    def vpos(self, i: int) -> int:
        return i

    def wpos(self, j: int) -> int:
        return self.l + 1 + j

    def is_v(self, pos: int) -> bool:
        return pos <= self.l

    @property
    def tangent_positions(self) -> list:
        """Ambient positions of e_1..e_l, e_1'..e_m' (the affine-chart frame)."""
        return list(range(1, self.l + 1)) + list(range(self.l + 2, self.ambient))

    def form_diagonal(self) -> np.ndarray:
        """Diagonal of G + H on V + W."""
        return np.concatenate([form_diagonal(FormKind.G, self.dim_v),
                               form_diagonal(FormKind.H, self.dim_w)])

    def embed(self, xv=None, yw=None):
        exact_mode = exact.is_exact(xv) or exact.is_exact(yw)
        out = exact.zeros(self.ambient) if exact_mode else np.zeros(self.ambient, complex)
        if xv is not None:
            out[self.v_slice] = xv
        if yw is not None:
            out[self.w_slice] = yw
        return out

    def split(self, vec):
        return vec[..., self.v_slice], vec[..., self.w_slice]

    def base_x(self) -> np.ndarray:
        x = np.zeros(self.dim_v, complex)
        x[0] = 1
        return x

    def base_y(self) -> np.ndarray:
        y = np.zeros(self.dim_w, complex)
        y[0] = 1
        return y


def inner(form: FormKind, v, w):
    """Sesquilinear pairing, conjugate-linear in the second slot."""
    v = v if exact.is_exact(v) else np.asarray(v)
    w = w if exact.is_exact(w) else np.asarray(w)
    if v.shape != w.shape:
        raise DimensionError(f"dimension mismatch {v.shape} vs {w.shape}")
    diag = form_diagonal(form, v.shape[-1])
    if exact.is_exact(v) or exact.is_exact(w):
        v, w = exact.array(v), exact.array(w)
        total = exact.ZERO
        for d, a, b in zip(diag, v, exact.conj(w)):
            total = total + a * b * int(d)
        return total
    return np.sum(diag * v * np.conj(w), axis=-1)


def g_norm(x) -> float:
    return float(np.real(inner(FormKind.G, x, x)))


def h_norm(y) -> float:
    return float(np.real(inner(FormKind.H, y, y)))


def in_hyperbolic(x, tol: float = 0.0) -> bool:
    return g_norm(x) > tol


# ---------------------------------------------------------------- projective


@dataclass(frozen=True)
class ProjectivePoint:
    representative: np.ndarray
    chart_normalized: bool = False

    @classmethod
    def of(cls, vec, normalize: bool = True) -> "ProjectivePoint":
        vec = np.asarray(vec, dtype=complex)
        if not np.any(vec):
            raise DimensionError("projective point needs a nonzero representative")
        if normalize and abs(vec[0]) > RANK_TOL * np.max(np.abs(vec)):
            return cls(vec / vec[0], True)
        return cls(vec, False)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.representative, dtype=dtype)

    @property
    def affine(self) -> np.ndarray:
        if not self.chart_normalized:
            raise ValueError("point is not in the affine chart")
        return self.representative[1:]


def chart_normalize(vec, tol: float = RANK_TOL):
    """Scale so the 0-th coordinate is 1; returns (vector, scale) or raises."""
    vec = np.asarray(vec)
    if abs(vec[0]) <= tol * max(1.0, float(np.max(np.abs(vec)))):
        raise ValueError("zeroth coordinate vanishes")
    s = 1.0 / vec[0]
    out = vec * s
    out[0] = 1
    return out, s


def canonical_representative(vec):
    """Chart-normalized when possible, else unit norm with the first
    max-modulus coordinate real positive.  Returns (vector, scale)."""
    vec = np.asarray(vec, dtype=complex)
    try:
        return chart_normalize(vec)
    except ValueError:
        i = int(np.argmax(np.abs(vec)))
        s = np.conj(vec[i]) / (abs(vec[i]) * np.linalg.norm(vec))
        return vec * s, s


def max_modulus_normalize(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    i = int(np.argmax(np.abs(vec)))
    if vec[i] == 0:
        raise RankError("zero vector has no projective class")
    return vec / vec[i]


def projective_distance(u, v) -> float:
    """Fubini-Study distance between the lines through u and v.

    Computed from the phase-aligned chord so that tiny distances keep full
    relative precision (arccos of the overlap would not).
    """
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise RankError("zero vector has no projective class")
    u, v = u / nu, v / nv
    ov = np.vdot(v, u)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    chord = np.linalg.norm(u - phase * v)
    return float(2.0 * np.arcsin(min(1.0, chord / 2.0)))


# ---------------------------------------------------------------- subspaces


def numerical_rank(mat, tol: float = RANK_TOL) -> int:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(mat, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel, relative singular cutoff."""
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    rows, cols = mat.shape
    if rows == 0:
        return np.eye(cols, dtype=complex)
    u, s, vh = np.linalg.svd(mat)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * top)) if top > 0 else 0
    return vh[rank:].conj().T


def orthonormal_basis(mat, tol: float = RANK_TOL) -> np.ndarray:
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    if mat.shape[1] == 0:
        return mat
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * top)) if top > 0 else 0
    return u[:, :rank]


@dataclass(frozen=True)
class Subspace:
    """Column span of ``basis``; the columns must be independent."""

    basis: np.ndarray
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        b = self.basis
        if not exact.is_exact(b):
            b = np.asarray(b, dtype=complex)
            if b.ndim == 1:
                b = b[:, None]
            object.__setattr__(self, "basis", b)
            if self.check and b.shape[1] and numerical_rank(b) < b.shape[1]:
                raise RankError("subspace basis is rank deficient")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    def orthonormal(self) -> np.ndarray:
        if self.dim == 0:
            return self.basis
        q, _ = np.linalg.qr(self.basis)
        return q

    def projector(self) -> np.ndarray:
        q = self.orthonormal()
        return q @ q.conj().T

    def contains(self, vec, tol: float = 1e-9) -> bool:
        vec = np.asarray(vec, dtype=complex)
        nv = np.linalg.norm(vec)
        if nv == 0:
            return True
        return np.linalg.norm(vec - self.projector() @ vec) <= tol * nv

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.dim == 0 or other.dim == 0:
            return Subspace(np.zeros((self.ambient, 0), complex))
        ker = null_space(np.hstack([self.orthonormal(), -other.orthonormal()]))
        vecs = self.orthonormal() @ ker[: self.dim]
        return Subspace(orthonormal_basis(vecs))


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Spectral norm of the projector difference (0 iff equal)."""
    if a.ambient != b.ambient:
        raise DimensionError("ambient mismatch")
    if a.dim != b.dim:
        return 1.0
    return float(np.linalg.norm(a.projector() - b.projector(), 2))


def orthogonal_complement(sub: Subspace, form_diag) -> Subspace:
    """Complement with respect to the diagonal form ``form_diag``.

    Raises DegenerateSubspaceError when the form is degenerate on ``sub``
    (then the complement meets ``sub``).
    """
    form_diag = np.asarray(form_diag, dtype=float)
    b = np.asarray(sub.basis, dtype=complex)
    if sub.dim == 0:
        return Subspace(np.eye(sub.ambient, dtype=complex))
    gram = b.conj().T @ (form_diag[:, None] * b)
    sv = np.linalg.svd(gram, compute_uv=False)
    scale = np.linalg.norm(b, 2) ** 2
    if sv[-1] <= RANK_TOL * scale:
        raise DegenerateSubspaceError("form is degenerate on the subspace")
    # v in complement  <=>  b^* F v = 0
    comp = null_space(b.conj().T * form_diag[None, :])
    return Subspace(comp)


# ---------------------------------------------------------------- group


@dataclass(frozen=True)
class GroupElement:
    """Element of U(1,l) x U(m+1)."""

    gV: np.ndarray
    gW: np.ndarray

    @property
    def space(self) -> SpacePair:
        return SpacePair(self.gV.shape[0] - 1, self.gW.shape[0] - 1)

    def residuals(self) -> tuple[float, float]:
        G = np.diag(form_diagonal(FormKind.G, self.gV.shape[0]))
        rv = np.max(np.abs(self.gV.conj().T @ G @ self.gV - G))
        rw = np.max(np.abs(self.gW.conj().T @ self.gW - np.eye(self.gW.shape[0])))
        return float(rv), float(rw)

    def check(self, tol: float = 1e-10) -> None:
        rv, rw = self.residuals()
        if rv > tol or rw > tol:
            raise ValueError(f"not in U(1,l) x U(m+1): residuals {rv:.2e}, {rw:.2e}")

    def block(self) -> np.ndarray:
        return scipy.linalg.block_diag(self.gV, self.gW)

    def act(self, vec) -> np.ndarray:
        """Act on an ambient vector (or matrix of column vectors)."""
        return self.block() @ np.asarray(vec)

    def inverse(self) -> "GroupElement":
        G = np.diag(form_diagonal(FormKind.G, self.gV.shape[0]))
        return GroupElement(G @ self.gV.conj().T @ G, self.gW.conj().T)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.gV @ other.gV, self.gW @ other.gW)

    @classmethod
    def identity(cls, space: SpacePair) -> "GroupElement":
        return cls(np.eye(space.dim_v, dtype=complex), np.eye(space.dim_w, dtype=complex))


def _boost(x: np.ndarray) -> np.ndarray:
    """Hermitian element of U(1,l) taking e_0 to x/sqrt((x,x)_G)."""
    x = x / x[0]
    u = x[1:]
    r2 = float(np.vdot(u, u).real)
    if r2 >= 1.0:
        raise NotInBallError("point has non-positive G-norm")
    gamma = 1.0 / np.sqrt(1.0 - r2)
    dim = x.shape[0]
    b = np.eye(dim, dtype=complex)
    b[0, 0] = gamma
    b[1:, 0] = gamma * u
    b[0, 1:] = gamma * u.conj()
    if r2 > 0:
        b[1:, 1:] += (gamma - 1.0) * np.outer(u, u.conj()) / r2
    return b


def _rotation(y: np.ndarray) -> np.ndarray:
    """Element of U(m+1) taking e_0 to a unit multiple of y, the identity at y ∝ e_0."""
    y = np.asarray(y, dtype=complex)
    y = y / np.linalg.norm(y)
    if abs(y[0]) > 0:
        y = y * (np.conj(y[0]) / abs(y[0]))
    c = float(np.real(y[0]))
    tail = y[1:]
    s = float(np.linalg.norm(tail))
    dim = y.shape[0]
    r = np.eye(dim, dtype=complex)
    if s == 0:
        return r
    u = tail / s
    r[0, 0] = c
    r[1:, 0] = s * u
    r[0, 1:] = -s * u.conj()
    r[1:, 1:] += (c - 1.0) * np.outer(u, u.conj())
    return r


def transport_to_base(x, y) -> GroupElement:
    """Group element g with g.x ∝ x0 and g.y ∝ y0.

    Built from the canonical boost of U(1,l) and the canonical rotation of
    U(m+1), so the base point gives the identity.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if g_norm(x) <= 0:
        raise NotInBallError("x is not in H^l (non-positive G-norm)")
    bx = _boost(x)
    G = np.diag(form_diagonal(FormKind.G, x.shape[0]))
    ry = _rotation(y)
    return GroupElement(G @ bx.conj().T @ G, ry.conj().T)


def random_group_element(seed, l: int, m: int, scale: float = 0.5) -> GroupElement:
    """exp of a random generator: G K (K anti-Hermitian) on V, anti-Hermitian on W."""
    rng = np.random.default_rng(seed)

    def anti_hermitian(d):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return scale * (a - a.conj().T) / 2

    G = np.diag(form_diagonal(FormKind.G, l + 1))
    gV = scipy.linalg.expm(G @ anti_hermitian(l + 1))
    gW = scipy.linalg.expm(anti_hermitian(m + 1))
    return GroupElement(gV, gW)


def stabilizer_element(seed, l: int, m: int) -> GroupElement:
    """Random element of the stabilizer U(1) x U(l) x U(1) x U(m) of (x0, y0)."""
    rng = np.random.default_rng(seed)

    def unitary(d):
        if d == 0:
            return np.zeros((0, 0), complex)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, r = np.linalg.qr(a)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    gV = scipy.linalg.block_diag(np.exp(1j * rng.uniform(0, 2 * np.pi)), unitary(l))
    gW = scipy.linalg.block_diag(np.exp(1j * rng.uniform(0, 2 * np.pi)), unitary(m))
    return GroupElement(np.atleast_2d(gV).astype(complex), np.atleast_2d(gW).astype(complex))
