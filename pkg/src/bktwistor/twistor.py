"""Twistor space Z_k(M) of M = H^l x P^m, the maps phi_{a,b} and psi_{a,b}.

A point is stored as representatives x in V, y in W and a k-plane L in
x^⊥ + y^⊥.  The plane is tied to the representatives: a tangent vector X at
[x] is identified with X(x) in x^⊥, so rescaling x by s rescales the V-part
of L by s.  With chart-normalized representatives (x^0 = y^0 = 1) the
affine coordinate frame d/dx^i, d/dy^j corresponds to

    eps_i  = P_x e_i  = e_i + conj(x^i) x / (x,x)_G
    eps_j' = P_y e_j' = e_j' - conj(y^j) y / (y,y)_H

and the Plücker coordinates of L in this frame are the z^{IJ'} of the
coordinate formulas.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import exact
from .errors import ChartError, DimensionError, NotInBallError, RankError
from .exterior import (
    GradedTensor,
    combos,
    graded_component,
    interior_conjugate,
    lambda_power,
    plucker_of_subspace,
    v_degrees,
    wedge_vector,
)
from .indices import normalize_keys
from .linalg import (
    RANK_TOL,
    GroupElement,
    SpacePair,
    Subspace,
    canonical_representative,
    g_norm,
    h_norm,
    max_modulus_normalize,
    null_space,
    orthonormal_basis,
    projective_distance,
)

PERP_TOL = 1e-10


# ---------------------------------------------------------------- fiber point


def frame_projection(space: SpacePair, x, y) -> np.ndarray:
    """Ambient matrix P = P_x + P_y (G- resp. H-orthogonal projections).

    Its restriction to span(e_i, e_j') is the affine-frame map e -> eps.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    gx = space.form_diagonal()[space.v_slice] * x
    pv = np.eye(space.dim_v, dtype=complex) - np.outer(x, gx.conj()) / g_norm(x)
    pw = np.eye(space.dim_w, dtype=complex) - np.outer(y, y.conj()) / h_norm(y)
    out = np.zeros((space.ambient, space.ambient), dtype=complex)
    out[space.v_slice, space.v_slice] = pv
    out[space.w_slice, space.w_slice] = pw
    return out


@dataclass
class FiberPoint:
    """kappa = (x, y, L) in Z_k(H^l x P^m)."""

    space: SpacePair
    x: np.ndarray
    y: np.ndarray
    L: Subspace
    _z: Optional[GradedTensor] = field(default=None, repr=False, compare=False)

    @classmethod
    def create(cls, space: SpacePair, x, y, basis, check: bool = True) -> "FiberPoint":
        """Canonicalize representatives (rescaling L with them) and validate."""
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        basis = np.asarray(basis, dtype=complex).reshape(space.ambient, -1).copy()
        if x.shape != (space.dim_v,) or y.shape != (space.dim_w,):
            raise DimensionError("representatives have the wrong dimension")
        if g_norm(x) <= 0:
            raise NotInBallError("x is not in H^l")
        x, sx = canonical_representative(x)
        y, sy = canonical_representative(y)
        basis[space.v_slice] *= sx
        basis[space.w_slice] *= sy
        k = basis.shape[1]
        if k:
            basis = orthonormal_basis(basis)
            if basis.shape[1] != k:
                raise RankError("plane basis is rank deficient")
        kp = cls(space, x, y, Subspace(basis, check=basis.shape[1] > 0))
        if check:
            kp.validate()
        return kp

    @classmethod
    def from_frame(cls, space: SpacePair, x, y, frame_basis) -> "FiberPoint":
        """Build from chart-normalized x, y and a plane given in the affine frame.

        ``frame_basis`` is ambient x k, supported on the non-affine positions.
        """
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        frame_basis = np.asarray(frame_basis, dtype=complex).reshape(space.ambient, -1)
        if frame_basis.shape[1] and np.any(frame_basis[[0, space.w0]]):
            raise DimensionError("frame coordinates must avoid the affine indices")
        basis = frame_projection(space, x, y) @ frame_basis
        return cls.create(space, x, y, basis)

    @property
    def k(self) -> int:
        return self.L.dim

    def validate(self, tol: float = PERP_TOL) -> None:
        sp = self.space
        if g_norm(self.x) <= 0 or h_norm(self.y) <= 0:
            raise NotInBallError("base point invalid")
        b = self.L.basis
        if b.shape[1] == 0:
            return
        fx = sp.form_diagonal()[sp.v_slice] * self.x
        rv = np.abs(fx.conj() @ b[sp.v_slice]) / (np.linalg.norm(self.x) * np.linalg.norm(b, axis=0))
        rw = np.abs(self.y.conj() @ b[sp.w_slice]) / (np.linalg.norm(self.y) * np.linalg.norm(b, axis=0))
        worst = float(max(rv.max(initial=0), rw.max(initial=0)))
        if worst > tol:
            raise DimensionError(f"L is not inside x^perp + y^perp (residual {worst:.2e})")

    def frame_basis(self) -> np.ndarray:
        """Basis of L in the affine frame (inverse of ``from_frame``)."""
        sp = self.space
        if abs(self.y[0]) < RANK_TOL or abs(self.x[0] - 1) > 1e-12:
            raise ChartError("affine frame needs chart-normalized x and y")
        b = self.L.basis.copy()
        b[sp.v_slice] -= np.outer(self.x, b[0]) / self.x[0]
        b[sp.w_slice] -= np.outer(self.y, b[sp.w0]) / self.y[0]
        b[0] = 0
        b[sp.w0] = 0
        return b

    @property
    def z(self) -> GradedTensor:
        """Plücker coordinates of L in the affine frame."""
        if self._z is None:
            self._z = plucker_of_subspace(self.frame_basis(), self.space)
        return self._z

    def plucker(self) -> GradedTensor:
        """Λ^k L inside Λ^k(V + W)."""
        return plucker_of_subspace(self.L.basis, self.space)

    def act(self, g: GroupElement) -> "FiberPoint":
        gb = g.block()
        return FiberPoint.create(self.space, g.gV @ self.x, g.gW @ self.y, gb @ self.L.basis)

    def over_base(self, tol: float = 1e-12) -> bool:
        return (np.max(np.abs(self.x[1:]), initial=0) <= tol
                and np.max(np.abs(self.y[1:]), initial=0) <= tol)

    def to_json(self) -> dict:
        pair = lambda v: [[float(c.real), float(c.imag)] for c in v]
        return {"x": pair(self.x), "y": pair(self.y),
                "L": [pair(col) for col in self.L.basis.T],
                "l": self.space.l, "m": self.space.m}

    @classmethod
    def from_json(cls, obj: dict, space: Optional[SpacePair] = None) -> "FiberPoint":
        vec = lambda v: np.array([complex(a, b) for a, b in v])
        x, y = vec(obj["x"]), vec(obj["y"])
        space = space or SpacePair(len(x) - 1, len(y) - 1)
        cols = [vec(c) for c in obj["L"]]
        basis = np.array(cols).T if cols else np.zeros((space.ambient, 0), complex)
        return cls.create(space, x, y, basis)


# ---------------------------------------------------------------- phi


def _affine(vec, exact_mode):
    if exact_mode:
        return exact.array(vec)
    return np.asarray(vec, dtype=complex)


def phi_recursive(space: SpacePair, x, y, z: GradedTensor, a: int, b: int) -> GradedTensor:
    """phi_{a,b} from the four-case coordinate recursion.

    ``x`` and ``y`` are chart-normalized representatives (x^0 = y^0 = 1),
    ``z`` is a degree-k tensor over the non-affine indices.  Words with
    repeated letters are evaluated with the contraction convention.
    """
    return coordinate_recursion(space, x, y, x, y, z, a, b)


def coordinate_recursion(space: SpacePair, x, y, zeta, nu, z: GradedTensor, a: int, b: int) -> GradedTensor:
    """The recursion with conj(x^i)/(x,x) replaced by conj(zeta^i)/(x,zeta).

    With zeta = x and nu = y this is phi_recursive; in general it computes
    the complexified map for the quadruple (x, zeta, y, nu).
    """
    k = z.degree
    if a + b != k + 1 or a < 0 or b < 0:
        raise DimensionError("need a + b = k + 1")
    exact_mode = z.is_exact or exact.is_exact(x) or exact.is_exact(zeta)
    x, y = _affine(x, exact_mode), _affine(y, exact_mode)
    zeta, nu = _affine(zeta, exact_mode), _affine(nu, exact_mode)
    if exact_mode:
        if x[0] != exact.ONE or y[0] != exact.ONE:
            raise ChartError("the recursion needs chart-normalized x, y")
    elif abs(x[0] - 1) > 1e-12 or abs(y[0] - 1) > 1e-12:
        raise ChartError("the recursion needs chart-normalized x, y")
    l, m = space.l, space.m
    conj = exact.conj_scalar
    xx = conj(zeta[0])
    for i in range(1, l + 1):
        xx = xx - x[i] * conj(zeta[i])
    yy = conj(nu[0])
    for j in range(1, m + 1):
        yy = yy + y[j] * conj(nu[j])
    for val, name in ((xx, "(x,zeta)_G"), (yy, "(y,nu)_H")):
        if (not val) or (not exact_mode and abs(val) < 1e-300):
            raise NotInBallError(f"{name} = 0")
    xbar = [None] + [conj(zeta[i]) / xx for i in range(1, l + 1)]
    ybar = [None] + [conj(nu[j]) / yy for j in range(1, m + 1)]
    wp = space.wpos

    def zc(vseq, wseq, lead=None):
        keys = ([lead] if lead is not None else []) + list(vseq) + [wp(j) for j in wseq]
        return z.coeff_positions(keys)

    cache00 = {}

    def phi00(I, J):
        key = (I, J)
        if key not in cache00:
            s = exact.ZERO if exact_mode else 0.0
            for i in range(1, l + 1):
                if i not in I:
                    s = s + xbar[i] * zc(I, J, lead=i)
            for j in range(1, m + 1):
                if j not in J:
                    s = s + ybar[j] * zc(I, J, lead=wp(j))
            cache00[key] = s if len(I) % 2 else -s  # (-1)^{|I|+1}
        return cache00[key]

    def reduce_word(seq):
        sign, red = normalize_keys(list(seq))
        return sign, tuple(red)

    def phi00_word(Iw, Jw):
        s1, I = reduce_word(Iw)
        s2, J = reduce_word(Jw)
        val = phi00(I, J)
        return val if s1 * s2 == 1 else -val

    def phiI0(I, J):
        v = zc(I, J)
        if len(I) % 2:
            v = -v
        for i in I:
            v = v - x[i] * phi00_word((i,) + I, J)
        return v

    def phi0J(I, J):
        v = zc(I, J)
        for j in J:
            v = v - y[j] * phi00_word(I, (j,) + J)
        return v

    def phi0J_word(Iw, J):
        s, I = reduce_word(Iw)
        val = phi0J(I, J)
        return val if s == 1 else -val

    def phiIJ(I, J):
        v = exact.ZERO if exact_mode else 0.0
        for j in J:
            v = v - y[j] * zc(I, J, lead=wp(j))
        for i in I:
            v = v - x[i] * phi0J_word((i,) + I, J)
        return v

    out = GradedTensor.zeros(space, k + 1, exact_mode)
    degs = v_degrees(l, m, k + 1)
    for slot, c in enumerate(combos(space.ambient, k + 1)):
        if degs[slot] != a:
            continue
        I = tuple(p for p in c if 0 < p <= l)
        J = tuple(p - l - 1 for p in c if p > l + 1)
        has0, has0w = 0 in c, (l + 1) in c
        if has0 and has0w:
            val = phi00(I, J)
        elif has0w:
            val = phiI0(I, J)
        elif has0:
            val = phi0J(I, J)
        else:
            val = phiIJ(I, J)
        out.coeffs[slot] = val
    return out


def phi_intrinsic(kappa: FiberPoint, a: int, b: int) -> GradedTensor:
    """[x ^ (1 - y ^ i(ȳ)/(y,y)) z + y ^ (1 - x ^ i(x̄)/(x,x)) z]_{(a,b)}, z = Λ^k L."""
    sp = kappa.space
    if a + b != kappa.k + 1:
        raise DimensionError("need a + b = k + 1")
    z = kappa.plucker()
    xe, ye = sp.embed(xv=kappa.x), sp.embed(yw=kappa.y)
    xx, yy = g_norm(kappa.x), h_norm(kappa.y)
    if kappa.k == 0:
        # nothing to contract: both projections act trivially on scalars
        return graded_component(wedge_vector(xe + ye, z), a, b)
    t1 = wedge_vector(xe, z - wedge_vector(ye, interior_conjugate(ye, z)) / yy)
    t2 = wedge_vector(ye, z - wedge_vector(xe, interior_conjugate(xe, z)) / xx)
    return graded_component(t1 + t2, a, b)


def phi_tensor(kappa: FiberPoint) -> GradedTensor:
    """All components at once: (x + y) ^ Λ^k L (valid since L ⊂ x^⊥ + y^⊥)."""
    sp = kappa.space
    return wedge_vector(sp.embed(xv=kappa.x, yw=kappa.y), kappa.plucker())


def component_vector(t: GradedTensor, a: int) -> np.ndarray:
    """Coefficients of the component with V-degree a, as a plain vector."""
    keep = v_degrees(t.space.l, t.space.m, t.degree) == a
    return t.vector()[keep]


# ---------------------------------------------------------------- psi


@dataclass
class PsiValue:
    first: np.ndarray
    second: np.ndarray
    a: int
    b: int

    @classmethod
    def from_vectors(cls, first, second, a, b, tol: float = 0.0) -> "PsiValue":
        first = np.asarray(first, dtype=complex)
        second = np.asarray(second, dtype=complex)
        if np.max(np.abs(first), initial=0) <= tol or np.max(np.abs(second), initial=0) <= tol:
            raise ChartError(f"outside chart ({a},{b}): a phi component vanishes")
        return cls(max_modulus_normalize(first), max_modulus_normalize(second), a, b)

    def distance(self, other: "PsiValue") -> float:
        if (self.a, self.b) != (other.a, other.b):
            raise DimensionError("PsiValues from different charts")
        return max(projective_distance(self.first, other.first),
                   projective_distance(self.second, other.second))

    def to_json(self) -> dict:
        pair = lambda v: [[float(c.real), float(c.imag)] for c in v]
        return {"a": self.a, "b": self.b, "first": pair(self.first), "second": pair(self.second)}


CHART_TOL = 1e-9


def _chart_threshold(phi: GradedTensor) -> float:
    return CHART_TOL * max(phi.max_abs(), 1e-300)


def psi_from_phi(phi: GradedTensor, a: int, b: int, checked: bool = False) -> PsiValue:
    """PsiValue from the full tensor sum_{a'} phi_{a', k+1-a'}.

    Unless ``checked`` (chart membership already settled on a balanced
    tensor), components below CHART_TOL relative to the whole tensor count
    as vanishing.
    """
    return PsiValue.from_vectors(component_vector(phi, a + 1), component_vector(phi, a),
                                 a, b, tol=0.0 if checked else _chart_threshold(phi))


def balanced_phi(kappa: FiberPoint) -> GradedTensor:
    """(x + y) ^ Λ^k L with unit-norm x, y and an orthonormal basis of L.

    x ^ A + y ^ B vanishes iff A and B do (neither involves x or y), so a
    component of this tensor vanishes exactly when the same component of
    phi does; the balanced scaling keeps the relative test meaningful when
    the chart representative of y is large.
    """
    sp = kappa.space
    v = sp.embed(xv=kappa.x / np.linalg.norm(kappa.x), yw=kappa.y / np.linalg.norm(kappa.y))
    return wedge_vector(v, kappa.plucker())


def live_components(phi: GradedTensor) -> list:
    """Flags per V-degree: component nonzero relative to CHART_TOL."""
    thr = _chart_threshold(phi)
    return [bool(np.max(np.abs(component_vector(phi, a)), initial=0) > thr) for a in range(phi.degree + 1)]


def psi(kappa: FiberPoint, a: int, b: int) -> PsiValue:
    """psi_{a,b}(kappa) = ([phi_{a+1,b}], [phi_{a,b+1}])."""
    if a + b != kappa.k or a < 0 or b < 0:
        raise DimensionError("need a + b = k")
    live = live_components(balanced_phi(kappa))
    if not (live[a] and live[a + 1]):
        raise ChartError(f"outside chart ({a},{b}): a phi component vanishes")
    return psi_from_phi(phi_tensor(kappa), a, b, checked=True)


def _block_rank(block: np.ndarray, scale: float, tol: float = RANK_TOL) -> int:
    """Rank of a block measured against the scale of the whole basis."""
    if block.size == 0:
        return 0
    s = np.linalg.svd(block, compute_uv=False)
    return int(np.sum(s > tol * scale))


def lemma_interval(kappa: FiberPoint) -> tuple[int, int]:
    """(dim L∩x^⊥, k - dim L∩y^⊥): the admissible range of a."""
    sp = kappa.space
    b = kappa.L.basis
    k = kappa.k
    if k == 0:
        return 0, 0
    scale = float(np.linalg.norm(b, 2))
    rank_w = _block_rank(b[sp.w_slice], scale)
    rank_v = _block_rank(b[sp.v_slice], scale)
    return k - rank_w, rank_v


def chart_membership_details(kappa: FiberPoint, a: int, b: int) -> dict:
    if a + b != kappa.k or a < 0 or b < 0:
        raise DimensionError("need a + b = k, a, b >= 0")
    live = live_components(balanced_phi(kappa))
    nonvanishing = live[a] and live[a + 1]
    lo, hi = lemma_interval(kappa)
    by_dims = lo <= a <= hi
    return {"nonvanishing": nonvanishing, "lemma": by_dims, "interval": (lo, hi)}


def chart_membership(kappa: FiberPoint, a: int, b: int) -> bool:
    """kappa in U_{a,b}; both criteria are evaluated and must agree."""
    d = chart_membership_details(kappa, a, b)
    if d["nonvanishing"] != d["lemma"]:
        raise RankError(f"chart criteria disagree at ({a},{b}): {d}")
    return d["nonvanishing"]


def charts_of(kappa: FiberPoint) -> list:
    lo, hi = lemma_interval(kappa)
    return [(a, kappa.k - a) for a in range(lo, hi + 1)]


# ---------------------------------------------------------------- (1,0)-forms


def twistor_one_forms(z: GradedTensor) -> np.ndarray:
    """Horizontal (1,0)-forms at a point over the base fiber.

    Rows are covectors on C^n + conj(C^n) in the order
    (e^1..e^n, ē^1..ē^n), indexed by the non-affine positions of ``z``:

        sum_{j not in I} z^{jI} ē^j   for |I| = k - 1
        sum_{i in I}     z^{iI} e^i   for |I| = k + 1
    """
    sp = z.space
    pos = sp.tangent_positions
    n = len(pos)
    k = z.degree
    if z.is_zero():
        raise RankError("z = 0")
    rows = []
    if k >= 1:
        for I in combos(n, k - 1):
            Ip = [pos[t] for t in I]
            row = np.zeros(2 * n, dtype=complex)
            for j in range(n):
                if j not in I:
                    row[n + j] = z.coeff_positions([pos[j]] + Ip)
            rows.append(row)
    if k + 1 <= n:
        for I in combos(n, k + 1):
            Ip = [pos[t] for t in I]
            row = np.zeros(2 * n, dtype=complex)
            for i in I:
                row[i] = z.coeff_positions([pos[i]] + Ip)
            rows.append(row)
    return np.array(rows, dtype=complex).reshape(-1, 2 * n)


def horizontal_antiholomorphic_basis(z: GradedTensor) -> np.ndarray:
    """Columns span the horizontal (0,1) space: the common kernel of the forms."""
    forms = twistor_one_forms(z)
    return null_space(forms / max(np.max(np.abs(forms)), 1e-300))


# ---------------------------------------------------------------- probes


@dataclass
class BaseFiberChart:
    """Holomorphic coordinates (h, W) around a base-fiber point.

    h in C^n moves the base point in affine coordinates, W in
    C^{(n-k) x k} moves the plane (in the frozen affine frame) through
    span(U + U_perp W).
    """

    space: SpacePair
    U: np.ndarray
    Uperp: np.ndarray

    @classmethod
    def at(cls, kappa: FiberPoint) -> "BaseFiberChart":
        if not kappa.over_base():
            raise ChartError("probe charts are centred on base-point fibers")
        sp = kappa.space
        pos = sp.tangent_positions
        frame = kappa.frame_basis()[pos]
        U = orthonormal_basis(frame) if frame.shape[1] else frame
        Uperp = null_space(U.conj().T) if U.shape[1] else np.eye(len(pos), dtype=complex)
        return cls(sp, U, Uperp)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def k(self) -> int:
        return self.U.shape[1]

    def point(self, h, W) -> FiberPoint:
        sp = self.space
        x = np.concatenate([[1.0], h[: sp.l]]).astype(complex)
        y = np.concatenate([[1.0], h[sp.l:]]).astype(complex)
        frame = np.zeros((sp.ambient, self.k), dtype=complex)
        frame[sp.tangent_positions] = self.U + self.Uperp @ W
        return FiberPoint.from_frame(sp, x, y, frame)


def _psi_chart_map(chart: BaseFiberChart, a: int, b: int):
    """psi in the fixed affine chart of both projective factors."""
    base = chart.point(np.zeros(chart.n, complex), np.zeros((chart.n - chart.k, chart.k), complex))
    p0 = psi(base, a, b)
    i1 = int(np.argmax(np.abs(p0.first)))
    i2 = int(np.argmax(np.abs(p0.second)))

    def f(h, W):
        phi = phi_tensor(chart.point(h, W))
        u, v = component_vector(phi, a + 1), component_vector(phi, a)
        return np.concatenate([np.delete(u / u[i1], i1), np.delete(v / v[i2], i2)])

    return f


def antiholomorphic_residual(kappa: FiberPoint, a: int, b: int, direction, h: float = 1e-4) -> float:
    """Central-difference Wirtinger estimate of Z psi_{a,b} along Z = c.d + d.dbar.

    ``direction`` = (c_h, d_h, c_v, d_v): coefficients of the holomorphic and
    antiholomorphic coordinate derivatives for the horizontal coordinates
    (length n) and the vertical chart coordinates ((n-k) x k).  For a
    genuine (0,1) vector the result vanishes up to O(h^2).
    """
    if h <= 1e-12:
        raise ValueError("step underflow")
    chart = BaseFiberChart.at(kappa)
    c_h, d_h, c_v, d_v = (np.asarray(t, dtype=complex) for t in direction)
    f = _psi_chart_map(chart, a, b)
    dxh, djh = (c_h + d_h.conj()) / 2, (c_h - d_h.conj()) / 2j
    dxv, djv = (c_v + d_v.conj()) / 2, (c_v - d_v.conj()) / 2j

    def deriv(dh, dv):
        return (f(h * dh, h * dv) - f(-h * dh, -h * dv)) / (2 * h)

    res = deriv(dxh, dxv) + 1j * deriv(djh, djv)
    return float(np.max(np.abs(res), initial=0.0))


def random_direction(kappa: FiberPoint, rng, kind: str = "01"):
    """Random unit direction of type (0,1) (twisted structure) or its conjugate (1,0)."""
    n, k = kappa.space.n, kappa.k
    basis = horizontal_antiholomorphic_basis(kappa.z)
    coef = rng.normal(size=basis.shape[1]) + 1j * rng.normal(size=basis.shape[1])
    hor = basis @ coef
    c_h, d_h = hor[:n], hor[n:]
    d_v = rng.normal(size=(n - k, k)) + 1j * rng.normal(size=(n - k, k))
    c_v = np.zeros_like(d_v)
    scale = np.sqrt(np.sum(np.abs(hor) ** 2) + np.sum(np.abs(d_v) ** 2))
    c_h, d_h, c_v, d_v = (t / scale for t in (c_h, d_h, c_v, d_v))
    if kind == "01":
        return c_h, d_h, c_v, d_v
    if kind == "10":
        return d_h.conj(), c_h.conj(), d_v.conj(), c_v.conj()
    raise ValueError("kind must be '01' or '10'")


def psi_jacobian_rank(kappa: FiberPoint, a: int, b: int, h: float = 1e-6, tol: float = 1e-6) -> tuple:
    """Numerical real rank of d(psi_{a,b}) at a base-fiber point.

    Returns (rank, expected) with expected = 2 (n + k (n - k)), the real
    dimension of Z_k.
    """
    chart = BaseFiberChart.at(kappa)
    n, k = chart.n, chart.k
    f = _psi_chart_map(chart, a, b)
    nv = (n - k) * k
    cols = []
    for idx in range(2 * (n + nv)):
        unit = 1.0 if idx % 2 == 0 else 1j
        slot = idx // 2
        dh = np.zeros(n, complex)
        dv = np.zeros(nv, complex)
        if slot < n:
            dh[slot] = unit
        else:
            dv[slot - n] = unit
        dv = dv.reshape(n - k, k)
        col = (f(h * dh, h * dv) - f(-h * dh, -h * dv)) / (2 * h)
        cols.append(np.concatenate([col.real, col.imag]))
    jac = np.array(cols).T
    s = np.linalg.svd(jac, compute_uv=False)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return rank, 2 * (n + nv)


def lambda_group(g: GroupElement, d: int) -> np.ndarray:
    return lambda_power(g.block(), d)
