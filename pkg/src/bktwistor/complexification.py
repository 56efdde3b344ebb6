"""Complexification of the fiber family: the maps Phi/Psi, the fiber solver,
membership and the intersection classification.

A quadruple q = (xi, zeta, mu, nu) with xi, zeta in H^l and (mu, nu) != 0
acts on a k-plane L_std in the coordinate directions through

    Phi_q(z) = (xi + mu) ^ Λ(Q) z,   Q v = v - xi (v,zeta)/(xi,zeta)  on V
                                     Q w = w - mu (w,nu)/(mu,nu)      on W

which equals the stated interior-product formula.  Its image is described
by the (k+1)-plane S = <xi + mu> + Q(L_std).  A fiber point kappa satisfies
psi(kappa) = Psi_q(z) on every shared chart iff <x + y> + L_kappa equals S
up to independent rescaling of the V and W parts; the solver works with
this characterization.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .errors import (
    BalancingError,
    ChartError,
    DimensionError,
    ModelError,
    NoIntersectionError,
    NotInBallError,
    QuadrupleError,
    RankError,
    TwistorError,
)
from .exterior import GradedTensor, interior_conjugate, plucker_of_subspace, wedge_vector
from .linalg import (
    GroupElement,
    SpacePair,
    Subspace,
    canonical_representative,
    chart_normalize,
    g_norm,
    h_norm,
    null_space,
    numerical_rank,
    orthonormal_basis,
    projective_distance,
    subspace_distance,
    transport_to_base,
)
from .twistor import (
    FiberPoint,
    PsiValue,
    balanced_phi,
    live_components,
    coordinate_recursion,
    phi_tensor,
    psi_from_phi,
)

MEMBER_TOL = 1e-7
EQUAL_TOL = 1e-9
PREDICATE_RTOL = 1e-9
# direct solves above this residual are retried through the perpendicular family
AUTO_RETRY_TOL = 1e-10


# ---------------------------------------------------------------- quadruple


def _gform(u, v) -> complex:
    """(u, v)_G = u^0 conj(v^0) - sum_i u^i conj(v^i)."""
    return complex(u[0] * np.conj(v[0]) - np.vdot(v[1:], u[1:]))


def _hform(u, v) -> complex:
    return complex(np.vdot(v, u))


@dataclass(frozen=True)
class ModuliQuadruple:
    xi: np.ndarray
    zeta: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    @classmethod
    def create(cls, xi, zeta, mu, nu, tol: float = 1e-12) -> "ModuliQuadruple":
        xi, zeta, mu, nu = (np.asarray(t, dtype=complex) for t in (xi, zeta, mu, nu))
        if xi.shape != zeta.shape or mu.shape != nu.shape or xi.ndim != 1 or mu.ndim != 1:
            raise DimensionError("quadruple entries have inconsistent dimensions")
        if g_norm(xi) <= 0 or g_norm(zeta) <= 0:
            raise QuadrupleError("xi and zeta must have positive G-norm")
        xi, zeta = xi / xi[0], zeta / zeta[0]
        mu, nu = canonical_representative(mu)[0], canonical_representative(nu)[0]
        if abs(_hform(mu, nu)) <= tol * np.linalg.norm(mu) * np.linalg.norm(nu):
            raise QuadrupleError("(mu, nu)_H = 0")
        if abs(_gform(xi, zeta)) <= tol:
            raise QuadrupleError("(xi, zeta)_G = 0")
        return cls(xi, zeta, mu, nu)

    @classmethod
    def real(cls, x, y) -> "ModuliQuadruple":
        """The quadruple (x, x, y, y) whose fiber is the fiber over (x, y)."""
        return cls.create(x, x, y, y)

    @property
    def space(self) -> SpacePair:
        return SpacePair(len(self.xi) - 1, len(self.mu) - 1)

    def act(self, g: GroupElement) -> "ModuliQuadruple":
        return ModuliQuadruple.create(g.gV @ self.xi, g.gV @ self.zeta, g.gW @ self.mu, g.gW @ self.nu)

    def dual(self) -> "ModuliQuadruple":
        """(zeta, xi, nu, mu): the quadruple of the perpendicular family."""
        return ModuliQuadruple.create(self.zeta, self.xi, self.nu, self.mu)

    def is_real(self, tol: float = EQUAL_TOL) -> bool:
        return (projective_distance(self.xi, self.zeta) <= tol
                and projective_distance(self.mu, self.nu) <= tol)

    def to_json(self) -> dict:
        pair = lambda v: [[float(c.real), float(c.imag)] for c in v]
        return {"xi": pair(self.xi), "zeta": pair(self.zeta), "mu": pair(self.mu), "nu": pair(self.nu)}

    @classmethod
    def from_json(cls, obj: dict) -> "ModuliQuadruple":
        vec = lambda v: np.array([complex(a, b) for a, b in v])
        return cls.create(vec(obj["xi"]), vec(obj["zeta"]), vec(obj["mu"]), vec(obj["nu"]))


def _q_matrix(q: ModuliQuadruple) -> np.ndarray:
    """Block matrix of Q = Q_V + Q_W."""
    sp = q.space
    G = sp.form_diagonal()[sp.v_slice]
    qv = np.eye(sp.dim_v, dtype=complex) - np.outer(q.xi, (G * q.zeta).conj()) / _gform(q.xi, q.zeta)
    qw = np.eye(sp.dim_w, dtype=complex) - np.outer(q.mu, q.nu.conj()) / _hform(q.mu, q.nu)
    return scipy.linalg.block_diag(qv, qw)


# ---------------------------------------------------------------- Phi / Psi


def Phi(quad: ModuliQuadruple, z: GradedTensor, a: int, b: int) -> GradedTensor:
    """Component (a, b) of Phi_q(z) by the complexified coordinate recursion.

    Needs mu^0 != 0 (the recursion is written in the affine chart).
    """
    if abs(quad.mu[0]) < 1e-12 * np.linalg.norm(quad.mu):
        raise ChartError("the coordinate recursion needs mu^0 != 0")
    mu = quad.mu / quad.mu[0]
    return coordinate_recursion(quad.space, quad.xi, mu, quad.zeta, quad.nu, z, a, b)


def Phi_tensor(quad: ModuliQuadruple, z: GradedTensor) -> GradedTensor:
    """All components of xi^(1 - mu^i(nu)/(mu,nu))z + mu^(1 - xi^i(zeta)/(xi,zeta))z."""
    sp = quad.space
    xi, mu = sp.embed(xv=quad.xi), sp.embed(yw=quad.mu)
    if z.degree == 0:
        return wedge_vector(xi + mu, z)
    zeta, nu = sp.embed(xv=quad.zeta), sp.embed(yw=quad.nu)
    t1 = wedge_vector(xi, z - wedge_vector(mu, interior_conjugate(nu, z)) / _hform(quad.mu, quad.nu))
    t2 = wedge_vector(mu, z - wedge_vector(xi, interior_conjugate(zeta, z)) / _gform(quad.xi, quad.zeta))
    return t1 + t2


def balanced_image(quad: ModuliQuadruple, basis: np.ndarray) -> GradedTensor:
    """Phi_q of a plane with unit xi, mu and an orthonormal basis of Q(L).

    Has the same vanishing components as Phi_tensor (see balanced_phi).
    """
    sp = quad.space
    v = sp.embed(xv=quad.xi / np.linalg.norm(quad.xi), yw=quad.mu / np.linalg.norm(quad.mu))
    if basis.shape[1] == 0:
        return wedge_vector(v, GradedTensor.scalar(sp))
    qb = orthonormal_basis(_q_matrix(quad) @ basis)
    if qb.shape[1] < basis.shape[1]:
        raise ChartError("Q collapses the plane")
    return wedge_vector(v, plucker_of_subspace(qb, sp))


def Psi(quad: ModuliQuadruple, z: GradedTensor, a: int, b: int) -> PsiValue:
    if a + b != z.degree or a < 0 or b < 0:
        raise DimensionError("need a + b = k")
    basis = plane_of_tensor(z) if z.degree else np.zeros((quad.space.ambient, 0), complex)
    live = live_components(balanced_image(quad, basis))
    if not (live[a] and live[a + 1]):
        raise ChartError(f"outside chart ({a},{b}): a Phi component vanishes")
    return psi_from_phi(Phi_tensor(quad, z), a, b, checked=True)


def charts_of_tensor(phi: GradedTensor) -> list:
    """Gradings (a, b) whose two psi components are both nonzero."""
    k = phi.degree - 1
    live = live_components(phi)
    return [(a, k - a) for a in range(k + 1) if live[a] and live[a + 1]]


def psi_residual(phi1: GradedTensor, phi2: GradedTensor, charts1=None, charts2=None) -> tuple[float, dict]:
    """Max projective distance over the charts shared by two phi tensors.

    Chart sets default to the relative test on the tensors themselves; pass
    them when they were decided on balanced tensors.  Differing chart sets
    give an infinite residual.
    """
    c1 = charts_of_tensor(phi1) if charts1 is None else list(charts1)
    c2 = charts_of_tensor(phi2) if charts2 is None else list(charts2)
    if not c1 or c1 != c2:
        return float("inf"), {}
    per = {}
    for a, b in c1:
        per[(a, b)] = psi_from_phi(phi1, a, b, checked=True).distance(psi_from_phi(phi2, a, b, checked=True))
    return max(per.values()), per


def plane_of_tensor(z: GradedTensor, tol: float = 1e-9) -> np.ndarray:
    """Basis of {v : v ^ z = 0}; for decomposable z this is the plane of z."""
    sp = z.space
    if z.is_zero():
        raise RankError("zero tensor has no plane")
    if z.degree == 0:
        return np.zeros((sp.ambient, 0), complex)
    z = z.to_complex()
    cols = []
    for p in range(sp.ambient):
        e = np.zeros(sp.ambient, complex)
        e[p] = 1
        cols.append(wedge_vector(e, z).vector())
    basis = null_space(np.array(cols).T, tol=tol)
    if basis.shape[1] != z.degree:
        raise RankError("tensor is not decomposable")
    return basis


# ---------------------------------------------------------------- balancing


@dataclass
class BalancingProblem:
    """An invertible A: W -> V with V = (C^{k+1}, G) and W = (C^{k+1}, I)."""

    A: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        if A.shape[0] != A.shape[1]:
            raise DimensionError("A must be square")
        self.A = A

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.A))

    @property
    def G(self) -> np.ndarray:
        d = self.A.shape[0]
        return np.diag(np.r_[1.0, -np.ones(d - 1)])


@dataclass
class BalancingSolution:
    x: np.ndarray
    y: np.ndarray
    r0: float
    condition: float
    gap: float


def balancing_solve(p: BalancingProblem, cond_max: float = 1e12) -> BalancingSolution:
    """Minimize (A^-1 v, A^-1 v) over (v, v)_G = 1.

    Stationary points solve M v = lam G v with M = A^-* A^-1.  Substituting
    v = A u turns the pencil into the Hermitian eigenproblem A^* G A u = w u
    with w = 1/lam, which needs no inverse of A.  A^* G A has the inertia
    of G, so exactly one w is positive and it gives the minimum; then
    y = u / sqrt(w) and x = A y.
    """
    A, G = p.A, p.G
    cond = p.condition
    if not np.isfinite(cond) or cond > cond_max:
        raise BalancingError(f"A is numerically singular (cond {cond:.3e})")
    H = A.conj().T @ (G @ A)
    w, vecs = scipy.linalg.eigh((H + H.conj().T) / 2)
    floor = 1e-14 * max(float(np.max(np.abs(w))), 1e-300)
    pos = np.flatnonzero(w > floor)
    if pos.size == 0:
        raise BalancingError("no eigenvector of positive G-norm")
    lams = sorted(1.0 / w[pos])
    gap = lams[1] - lams[0] if len(lams) > 1 else float("inf")
    if gap <= 1e-10 * lams[0]:
        raise BalancingError("minimal eigenvalue is degenerate")
    i = int(np.argmax(w))
    y = vecs[:, i] / np.sqrt(w[i])
    x = A @ y
    nz = np.flatnonzero(np.abs(x) > 1e-14 * np.max(np.abs(x)))[0]
    phase = abs(x[nz]) / x[nz]
    return BalancingSolution(x * phase, y * phase, float(1.0 / w[i]), cond, float(gap))


def balancing_residuals(p: BalancingProblem, sol: BalancingSolution) -> dict:
    """Postcondition residuals: (x,x)_G = 1, A y = x, A(y^perp) = x^perp."""
    A, G = p.A, p.G
    x, y = sol.x, sol.y
    norm_res = abs(np.real(x.conj() @ G @ x) - 1.0)
    map_res = np.linalg.norm(A @ y - x) / np.linalg.norm(x)
    yperp = null_space(y.conj()[None, :])
    xperp = null_space((G @ x).conj()[None, :])
    if yperp.shape[1]:
        perp_res = subspace_distance(Subspace(A @ yperp), Subspace(xperp))
    else:
        perp_res = 0.0
    return {"norm": float(norm_res), "map": float(map_res), "perp": float(perp_res)}


# ---------------------------------------------------------------- gauge


@dataclass
class Gauge:
    """Transport g with g.zeta ∝ x0, g.nu ∝ y0 and the normalized image quadruple."""

    g: GroupElement
    quad: ModuliQuadruple
    s: complex
    t: complex

    @classmethod
    def of(cls, quad: ModuliQuadruple, g: Optional[GroupElement] = None) -> "Gauge":
        if g is None:
            g = transport_to_base(quad.zeta, quad.nu)
        gz, gn = g.gV @ quad.zeta, g.gW @ quad.nu
        if (np.linalg.norm(gz[1:]) > 1e-9 * abs(gz[0])
                or np.linalg.norm(gn[1:]) > 1e-9 * np.linalg.norm(gn)):
            raise ValueError("group element does not transport (zeta, nu) to the base point")
        gxi, gmu = g.gV @ quad.xi, g.gW @ quad.mu
        if abs(gmu[0]) <= 1e-14 * np.linalg.norm(gmu):
            raise QuadrupleError("(mu, nu) = 0 after transport")
        sp = quad.space
        qg = ModuliQuadruple(gxi / gxi[0], sp.base_x(), gmu / gmu[0], sp.base_y())
        return cls(g, qg, complex(gxi[0]), complex(gmu[0]))

    def plane(self, quad: ModuliQuadruple, basis: np.ndarray) -> np.ndarray:
        """Gauge-frame plane D g Q L (coordinate directions only)."""
        sp = quad.space
        out = self.g.block() @ (_q_matrix(quad) @ basis)
        out[sp.v_slice] /= self.s
        out[sp.w_slice] /= self.t
        out[[0, sp.w0]] = 0  # vanish up to rounding
        return out


# ---------------------------------------------------------------- solver


@dataclass
class Reduction:
    dim_v1: int
    dim_w1: int
    k2: int
    duality_applied: bool = False

    def to_json(self) -> dict:
        return {"V1": self.dim_v1, "W1": self.dim_w1, "k2": self.k2,
                "duality_applied": self.duality_applied}


@dataclass
class SolveResult:
    kappa: FiberPoint
    residual: float
    per_chart: dict
    reduction: Reduction
    balancing: Optional[BalancingSolution] = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa.to_json(),
            "residual": self.residual,
            "charts": [{"a": a, "b": b, "residual": r} for (a, b), r in sorted(self.per_chart.items())],
            "reduction": self.reduction.to_json(),
            "r0": None if self.balancing is None else self.balancing.r0,
            "condition": None if self.balancing is None else self.balancing.condition,
        }


def _orth(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.size == 0 or mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0), complex)
    return orthonormal_basis(mat)


def _solve_in_gauge(space: SpacePair, xi, mu, frame: np.ndarray):
    """Gauge (zeta, nu) = (x0, y0), chart-normalized xi, mu.

    ``frame`` is an ambient basis of the plane, supported on the coordinate
    directions.  Returns (x, y, reduction, balancing solution) such that
    <x + y> + P_{x,y}(frame) = <xi + mu> + frame.
    """
    l, m = space.l, space.m
    k = frame.shape[1]
    B = frame[space.tangent_positions]
    Bv, Bw = B[:l], B[l:]
    xi1, mu1 = xi[1:], mu[1:]
    V1 = _orth(Bv @ null_space(Bw)) if k and l else np.zeros((l, 0), complex)
    W1 = _orth(Bw @ null_space(Bv)) if k and m else np.zeros((m, 0), complex)
    if k:
        cons = np.vstack([V1.conj().T @ Bv, W1.conj().T @ Bw])
        L2 = B @ null_space(cons) if cons.shape[0] else B
    else:
        L2 = np.zeros((l + m, 0), complex)
    k2 = L2.shape[1]
    V3, W3 = _orth(L2[:l]), _orth(L2[l:])
    if V3.shape[1] != k2 or W3.shape[1] != k2:
        raise RankError("plane reduction failed: graph part is not injective")
    proj_v = V1 @ V1.conj().T + V3 @ V3.conj().T
    proj_w = W1 @ W1.conj().T + W3 @ W3.conj().T
    a4 = xi1 - proj_v @ xi1
    b4 = mu1 - proj_w @ mu1
    alpha2 = 1.0 - float(np.vdot(a4, a4).real)
    if alpha2 <= 0:
        raise NotInBallError("reduced xi left the ball")
    alpha, beta = np.sqrt(alpha2), np.sqrt(1.0 + float(np.vdot(b4, b4).real))
    P = V3.conj().T @ L2[:l]
    Qm = W3.conj().T @ L2[l:]
    T = (alpha / beta) * Qm @ np.linalg.inv(P) if k2 else np.zeros((0, 0), complex)
    xi3 = V3.conj().T @ xi1 / alpha
    mu3 = W3.conj().T @ mu1 / beta
    Sv = np.eye(k2 + 1, dtype=complex)
    Sv[1:, 0] = xi3
    Sw = np.eye(k2 + 1, dtype=complex)
    Sw[1:, 0] = mu3
    Sw[1:, 1:] = T
    A = Sv @ np.linalg.inv(Sw)
    sol = balancing_solve(BalancingProblem(A))
    xt = chart_normalize(sol.x)[0]
    yt = chart_normalize(sol.y)[0]
    xv = alpha * (V3 @ xt[1:]) + a4
    yw = beta * (W3 @ yt[1:]) + b4
    x = np.concatenate([[1.0], xv]).astype(complex)
    y = np.concatenate([[1.0], yw]).astype(complex)
    red = Reduction(V1.shape[1], W1.shape[1], k2)
    return x, y, red, sol


def _as_basis(space: SpacePair, z: Union[GradedTensor, np.ndarray]) -> np.ndarray:
    if isinstance(z, GradedTensor):
        basis = plane_of_tensor(z)
    else:
        basis = np.asarray(z, dtype=complex).reshape(space.ambient, -1)
    if basis.shape[1] and np.max(np.abs(basis[[0, space.w0]])) > 1e-12 * max(1.0, np.max(np.abs(basis))):
        raise DimensionError("z must be supported on the coordinate directions")
    return basis


def perp_dual(kappa: FiberPoint) -> FiberPoint:
    """(x, y, L) -> (x, y, L^perp), the complement inside x^perp + y^perp for
    the product metric -(,)_G/(x,x)_G + (,)_H/(y,y)_H."""
    sp = kappa.space
    x, y = kappa.x, kappa.y
    G = sp.form_diagonal()[sp.v_slice]
    tangent = np.zeros((sp.ambient, sp.n), complex)
    tangent[sp.v_slice, : sp.l] = null_space((G * x).conj()[None, :])
    tangent[sp.w_slice, sp.l:] = null_space(y.conj()[None, :])
    weights = np.r_[-G / g_norm(x), np.ones(sp.dim_w) / h_norm(y)]
    b = kappa.L.basis
    if b.shape[1] == 0:
        return FiberPoint.create(sp, x, y, tangent)
    # t in tangent with <b, t> = 0 for the weighted form
    comp = tangent @ null_space(b.conj().T @ (weights[:, None] * tangent))
    return FiberPoint.create(sp, x, y, comp)


def solve_fiber_detailed(quad: ModuliQuadruple, z: Union[GradedTensor, np.ndarray],
                         method: str = "auto", transport: Optional[GroupElement] = None) -> SolveResult:
    """Fiber point kappa with psi(kappa) = Psi_q(z) on all charts of z.

    ``z`` is a decomposable tensor (or a basis) over the coordinate
    directions.  ``method`` selects the direct reduction, the route through
    the perpendicular family, or "auto": direct, falling back to the
    perpendicular route when the direct residual exceeds AUTO_RETRY_TOL
    (the two balancing problems are conditioned differently), keeping the
    smaller residual.
    """
    if method == "auto":
        try:
            res = solve_fiber_detailed(quad, z, "direct", transport)
        except TwistorError:
            return solve_fiber_detailed(quad, z, "dual", transport)
        if res.residual <= AUTO_RETRY_TOL:
            return res
        try:
            alt = solve_fiber_detailed(quad, z, "dual", transport)
        except TwistorError:
            return res
        return alt if alt.residual < res.residual else res
    sp = quad.space
    basis = _as_basis(sp, z)
    k = basis.shape[1]
    gauge = Gauge.of(quad, transport)
    qg = gauge.quad
    frame = gauge.plane(quad, basis)
    if k and numerical_rank(frame) < k:
        raise ChartError("z lies outside every chart (Q collapses the plane)")
    if method == "direct":
        x, y, red, sol = _solve_in_gauge(sp, qg.xi, qg.mu, frame)
        kappa_g = FiberPoint.from_frame(sp, x, y, frame)
    elif method == "dual":
        kappa_g, red, sol = _solve_dual_in_gauge(sp, qg, frame)
    else:
        raise ValueError(f"unknown method {method!r}")
    kappa = kappa_g.act(gauge.g.inverse())
    zt = plucker_of_subspace(basis, sp) if k else GradedTensor.scalar(sp)
    residual, per = psi_residual(phi_tensor(kappa), Phi_tensor(quad, zt),
                                 charts_of_tensor(balanced_phi(kappa)),
                                 charts_of_tensor(balanced_image(quad, basis)))
    return SolveResult(kappa, residual, per, red, sol)


def _solve_dual_in_gauge(sp: SpacePair, qg: ModuliQuadruple, frame: np.ndarray):
    """Solve for the perpendicular family, then dualize back."""
    J = np.r_[sp.form_diagonal()[sp.v_slice], -np.ones(sp.dim_w)]
    S = np.hstack([sp.embed(xv=qg.xi, yw=qg.mu)[:, None], frame])
    Sperp = null_space(S.conj().T * J[None, :])
    # restrict to xi^perp + mu^perp
    G = sp.form_diagonal()[sp.v_slice]
    cons = np.vstack([np.r_[(G * qg.xi).conj(), np.zeros(sp.dim_w)],
                      np.r_[np.zeros(sp.dim_v), qg.mu.conj()]])
    Lp = Sperp @ null_space(cons @ Sperp)
    if Lp.shape[1] != sp.n - frame.shape[1]:
        raise RankError("perpendicular plane has the wrong dimension")
    Lp[[0, sp.w0]] = 0  # drop the zeta-direction (x0, y0 in this gauge)
    dq = qg.dual()
    inner = solve_fiber_detailed(dq, Lp, method="direct")
    red = inner.reduction
    red = Reduction(red.dim_v1, red.dim_w1, red.k2, duality_applied=True)
    return perp_dual(inner.kappa), red, inner.balancing


def solve_fiber(quad: ModuliQuadruple, z: Union[GradedTensor, np.ndarray], method: str = "auto") -> FiberPoint:
    return solve_fiber_detailed(quad, z, method).kappa


# ---------------------------------------------------------------- membership


def member_residual(kappa: FiberPoint, quad: ModuliQuadruple) -> float:
    """psi(kappa) against Psi_q of kappa's own plane, read in the gauge of q."""
    gauge = Gauge.of(quad)
    kg = kappa.act(gauge.g)
    if abs(kg.y[0]) < 1e-10 * np.linalg.norm(kg.y):
        return float("inf")
    frame = kg.frame_basis()
    sp = kappa.space
    if kappa.k:
        frame = orthonormal_basis(frame)
        if frame.shape[1] != kappa.k:
            return float("inf")
    zt = plucker_of_subspace(frame, sp) if kappa.k else GradedTensor.scalar(sp)
    res, _ = psi_residual(phi_tensor(kg), Phi_tensor(gauge.quad, zt),
                          charts_of_tensor(balanced_phi(kg)),
                          charts_of_tensor(balanced_image(gauge.quad, frame)))
    return res


def member(kappa: FiberPoint, quad: ModuliQuadruple, tol: float = MEMBER_TOL) -> bool:
    return member_residual(kappa, quad) <= tol


# ---------------------------------------------------------------- intersection


class IntersectionTag(enum.Enum):
    DISJOINT = "Disjoint"
    G_K_N1 = "G(k,n-1)"
    G_K1_N1 = "G(k-1,n-1)"
    G_K1_N2 = "G(k-1,n-2)"
    IDENTICAL = "Identical"


@dataclass(frozen=True)
class IntersectionType:
    tag: IntersectionTag
    k: int
    n: int

    @property
    def grassmannian(self) -> Optional[tuple]:
        shift = {IntersectionTag.G_K_N1: (0, 1), IntersectionTag.G_K1_N1: (1, 1),
                 IntersectionTag.G_K1_N2: (1, 2)}.get(self.tag)
        if shift is None:
            return None
        return self.k - shift[0], self.n - shift[1]

    @property
    def is_empty(self) -> bool:
        if self.tag == IntersectionTag.DISJOINT:
            return True
        g = self.grassmannian
        return g is not None and not 0 <= g[0] <= g[1]

    @property
    def dimension(self) -> Optional[int]:
        """Complex dimension of the intersection (None when identical or empty)."""
        g = self.grassmannian
        if g is None or self.is_empty:
            return None
        return g[0] * (g[1] - g[0])

    def to_json(self) -> dict:
        g = self.grassmannian
        return {"tag": self.tag.value, "k": self.k, "n": self.n,
                "grassmannian": None if g is None else list(g),
                "empty": self.is_empty, "dimension": self.dimension}


def cross_ratios(q1: ModuliQuadruple, q2: ModuliQuadruple) -> tuple[complex, complex]:
    lhs = (_gform(q1.xi, q2.zeta) * _gform(q2.xi, q1.zeta)
           / (_gform(q1.xi, q1.zeta) * _gform(q2.xi, q2.zeta)))
    rhs = (_hform(q1.mu, q2.nu) * _hform(q2.mu, q1.nu)
           / (_hform(q1.mu, q1.nu) * _hform(q2.mu, q2.nu)))
    return lhs, rhs


def intersection_predicate(q1: ModuliQuadruple, q2: ModuliQuadruple, rtol: float = PREDICATE_RTOL) -> bool:
    if q1.space != q2.space:
        raise DimensionError("quadruples live over different spaces")
    lhs, rhs = cross_ratios(q1, q2)
    return abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs))


def _same(u, v, tol=EQUAL_TOL) -> bool:
    return projective_distance(u, v) <= tol


def intersection_type(q1: ModuliQuadruple, q2: ModuliQuadruple, k: int) -> IntersectionType:
    n = q1.space.n
    if not intersection_predicate(q1, q2):
        return IntersectionType(IntersectionTag.DISJOINT, k, n)
    same_front = _same(q1.xi, q2.xi) and _same(q1.mu, q2.mu)
    same_back = _same(q1.zeta, q2.zeta) and _same(q1.nu, q2.nu)
    if same_front and same_back:
        return IntersectionType(IntersectionTag.IDENTICAL, k, n)
    if same_front:
        return IntersectionType(IntersectionTag.G_K_N1, k, n)
    if same_back:
        return IntersectionType(IntersectionTag.G_K1_N1, k, n)
    return IntersectionType(IntersectionTag.G_K1_N2, k, n)


@dataclass
class SchubertData:
    """In the gauge of q2: common planes L satisfy delta in L ⊂ ker h."""

    gauge: Gauge
    delta: np.ndarray
    h: np.ndarray

    @classmethod
    def of(cls, q1: ModuliQuadruple, q2: ModuliQuadruple) -> "SchubertData":
        gauge = Gauge.of(q2)
        g = gauge.g
        xi1, zeta1 = g.gV @ q1.xi, g.gV @ q1.zeta
        mu1, nu1 = g.gW @ q1.mu, g.gW @ q1.nu
        if abs(mu1[0]) <= 1e-12 * np.linalg.norm(mu1):
            raise NoIntersectionError("(mu1, nu2) = 0: the families are disjoint")
        xi1, mu1 = xi1 / xi1[0], mu1 / mu1[0]
        q2g = gauge.quad
        delta = np.r_[xi1[1:] - q2g.xi[1:], mu1[1:] - q2g.mu[1:]]
        # h(l) = (l_V, zeta1)_G / (xi1, zeta1)_G - (l_W, nu1)_H / (mu1, nu1)_H on coordinate directions
        hv = -zeta1[1:].conj() / _gform(xi1, zeta1)
        hw = -nu1[1:].conj() / _hform(mu1, nu1)
        return cls(gauge, delta, np.r_[hv, hw])

    def constraint_rank(self, U: np.ndarray) -> tuple[int, int]:
        """(rank of the linearized constraints, chart dimension) at span(U)."""
        n, k = U.shape
        Up = null_space(U.conj().T) if k else np.eye(n, dtype=complex)
        rows = []
        # X U^* delta = Up^* delta, h (U + Up X) = 0, both linear in X
        c = U.conj().T @ self.delta
        for r in range(n - k):
            for col in range(k):
                E = np.zeros((n - k, k), complex)
                E[r, col] = 1
                rows.append(np.r_[E @ c, self.h @ Up @ E])
        jac = np.array(rows).T if rows else np.zeros((0, 0))
        return (numerical_rank(jac, tol=1e-9) if jac.size else 0), (n - k) * k


def _embed_plane(space: SpacePair, B: np.ndarray) -> np.ndarray:
    out = np.zeros((space.ambient, B.shape[1]), complex)
    out[space.tangent_positions] = B
    return out


def schubert_witness(q1: ModuliQuadruple, q2: ModuliQuadruple, k: int, seed=None) -> FiberPoint:
    """A fiber point in both families.

    Picks a plane L with delta in L ⊂ ker h in the gauge of q2 (random
    completion when ``seed`` is given) and solves the q2 fiber for it.
    """
    itype = intersection_type(q1, q2, k)
    if itype.tag == IntersectionTag.IDENTICAL:
        raise ValueError("identical quadruples: every fiber point is a witness")
    if itype.is_empty:
        raise NoIntersectionError(f"no common fiber point ({itype.tag.value}, k={k})")
    data = SchubertData.of(q1, q2)
    B = witness_plane(data, k, seed)
    sp = q2.space
    frame = _embed_plane(sp, B)
    qg = data.gauge.quad
    x, y, _, _ = _solve_in_gauge(sp, qg.xi, qg.mu, frame)
    return FiberPoint.from_frame(sp, x, y, frame).act(data.gauge.g.inverse())


def witness_plane(data: SchubertData, k: int, seed=None) -> np.ndarray:
    n = len(data.delta)
    rng = np.random.default_rng(0 if seed is None else seed)
    h = data.h
    kerh = null_space(h[None, :]) if np.linalg.norm(h) > 1e-12 else np.eye(n, dtype=complex)
    d = data.delta
    if np.linalg.norm(d) > 1e-12:
        d = d / np.linalg.norm(d)
        rest = kerh - np.outer(d, d.conj() @ kerh)
        rest = _orth(rest)
        need = k - 1
        if need < 0:
            raise NoIntersectionError("k = 0 fibers are single points")
        coef = rng.normal(size=(rest.shape[1], need)) + 1j * rng.normal(size=(rest.shape[1], need))
        B = np.hstack([d[:, None], rest @ coef])
    else:
        coef = rng.normal(size=(kerh.shape[1], k)) + 1j * rng.normal(size=(kerh.shape[1], k))
        B = kerh @ coef
    if numerical_rank(B) < k:
        raise RankError("witness plane is degenerate")
    return B


def witness_family_dimension(q1: ModuliQuadruple, q2: ModuliQuadruple, k: int, seed=None) -> int:
    """Complex dimension of the family of common points, from the constraint rank."""
    data = SchubertData.of(q1, q2)
    U = orthonormal_basis(witness_plane(data, k, seed))
    rank, dim = data.constraint_rank(U)
    return dim - rank


def sample_witness_family(q1: ModuliQuadruple, q2: ModuliQuadruple, k: int, count: int, seed=0) -> list:
    """Independent common fiber points (the family is an affine space in a chart)."""
    return [schubert_witness(q1, q2, k, seed=np.random.SeedSequence([seed, i]).generate_state(1)[0])
            for i in range(count)]


# ---------------------------------------------------------------- models


def flag_correspondence(kappa: FiberPoint) -> tuple[Subspace, Subspace]:
    """(U, U') for the one-factor models; U^perp ∩ U' is the base point."""
    sp = kappa.space
    b = kappa.L.basis
    if sp.l == 0:
        U = b[sp.w_slice]
        Up = np.hstack([kappa.y[:, None], U])
    elif sp.m == 0:
        U = b[sp.v_slice]
        Up = np.hstack([kappa.x[:, None], U])
        G = sp.form_diagonal()[sp.v_slice]
        if U.shape[1]:
            gram = U.conj().T @ (G[:, None] * U)
            if np.max(np.linalg.eigvalsh(gram)) >= 0:
                raise ModelError("U is not negative definite")
    else:
        raise ModelError("flag correspondence needs l = 0 or m = 0")
    return Subspace(U), Subspace(Up)


def flag_to_fiber(space: SpacePair, U: np.ndarray, Uprime: np.ndarray) -> FiberPoint:
    """Inverse of flag_correspondence, checking the sign conditions."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2:
        raise DimensionError("U must be given as a basis matrix")
    Uprime = np.asarray(Uprime, dtype=complex)
    if space.l == 0:
        F = np.ones(space.dim_w)
    elif space.m == 0:
        F = space.form_diagonal()[space.v_slice]
        if U.shape[1]:
            gram = U.conj().T @ (F[:, None] * U)
            if np.max(np.linalg.eigvalsh((gram + gram.conj().T) / 2)) >= -1e-12:
                raise ModelError("U must be negative definite")
    else:
        raise ModelError("flag correspondence needs l = 0 or m = 0")
    if Uprime.shape[1] != U.shape[1] + 1:
        raise DimensionError("need dim U' = dim U + 1")
    if U.shape[1] and numerical_rank(np.hstack([Uprime, U])) != Uprime.shape[1]:
        raise DimensionError("U is not contained in U'")
    # base point: U^perp ∩ U'
    cons = U.conj().T @ (F[:, None] * Uprime) if U.shape[1] else np.zeros((0, Uprime.shape[1]))
    c = null_space(cons) if cons.shape[0] else np.eye(Uprime.shape[1], dtype=complex)
    p = Uprime @ c[:, 0]
    if np.real(np.vdot(p, F * p)) <= 0:
        raise ModelError("U' has no positive line orthogonal to U")
    full = np.zeros((space.ambient, U.shape[1]), complex)
    if space.l == 0:
        full[space.w_slice] = U
        return FiberPoint.create(space, space.base_x(), p, full)
    full[space.v_slice] = U
    return FiberPoint.create(space, p, space.base_y(), full)


def rank_stratum(kappa: FiberPoint, tol: float = 1e-9) -> int:
    """Rank of phi_{1,1}(kappa) as a matrix in V ⊗ W."""
    sp = kappa.space
    if kappa.k != 1:
        raise DimensionError("rank stratum is defined for k = 1")
    if sp.l < 1 or sp.m < 1:
        raise ModelError("rank stratum needs l, m >= 1")
    phi = phi_tensor(kappa)
    mat = np.zeros((sp.dim_v, sp.dim_w), complex)
    for (I, J), c in phi.entries():
        if len(I) == 1 and len(J) == 1:
            mat[I[0], J[0]] = c
    return numerical_rank(mat, tol=tol)
