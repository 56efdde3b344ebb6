import numpy as np
import pytest

from bktwistor.complexification import (
    BalancingProblem,
    Gauge,
    IntersectionTag,
    ModuliQuadruple,
    Phi,
    Psi,
    balancing_residuals,
    balancing_solve,
    flag_correspondence,
    flag_to_fiber,
    intersection_predicate,
    intersection_type,
    member,
    member_residual,
    rank_stratum,
    sample_witness_family,
    schubert_witness,
    solve_fiber,
    solve_fiber_detailed,
    witness_family_dimension,
)
from bktwistor.errors import (
    BalancingError,
    DimensionError,
    ModelError,
    NoIntersectionError,
    QuadrupleError,
)
from bktwistor.exterior import combos, plucker_of_subspace
from bktwistor.linalg import SpacePair, projective_distance, stabilizer_element, subspace_distance
from bktwistor.oracles import balancing_descent
from bktwistor.sampling import sample_fiber_point, sample_plane, sample_quadruple
from bktwistor.twistor import FiberPoint, charts_of, phi_recursive, psi

from conftest import cnormal

SP = SpacePair(1, 1)


def frame_z(sp, rng, k):
    return plucker_of_subspace(sample_plane(rng, sp, k), sp)


# ---------------------------------------------------------------- Phi / Psi


def test_real_quadruple_matches_phi():
    rng = np.random.default_rng(1)
    kappa = sample_fiber_point(rng, 2, 1, 2)
    q = ModuliQuadruple.real(kappa.x, kappa.y)
    for a in range(4):
        got = Phi(q, kappa.z, a, 3 - a)
        ref = phi_recursive(kappa.space, kappa.x, kappa.y, kappa.z, a, 3 - a)
        assert np.allclose(got.coeffs, ref.coeffs, atol=1e-12)
    for a, b in charts_of(kappa):
        assert Psi(q, kappa.z, a, b).distance(psi(kappa, a, b)) <= 1e-10


def test_gauge_display_has_no_double_affine_terms():
    rng = np.random.default_rng(2)
    sp = SpacePair(2, 2)
    q = ModuliQuadruple.create(np.r_[1, 0.3 * cnormal(rng, 2)], sp.base_x(), cnormal(rng, 3), sp.base_y())
    z = frame_z(sp, rng, 2)
    for a in range(4):
        t = Phi(q, z, a, 3 - a)
        for idx, c in enumerate(combos(sp.ambient, 3)):
            if 0 in c and sp.w0 in c:
                assert t.coeffs[idx] == 0


def test_phi_linear_in_z():
    rng = np.random.default_rng(3)
    q = sample_quadruple(rng, 2, 1)
    sp = q.space
    z1, z2 = frame_z(sp, rng, 2), frame_z(sp, rng, 2)
    for a in range(4):
        lhs = Phi(q, z1 * 2.0 + z2 * 1j, a, 3 - a)
        rhs = Phi(q, z1, a, 3 - a) * 2.0 + Phi(q, z2, a, 3 - a) * 1j
        assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_quadruple_validation():
    with pytest.raises(QuadrupleError):
        ModuliQuadruple.create([1, 0], [1, 0], [1, 0], [0, 1])
    with pytest.raises(QuadrupleError):
        ModuliQuadruple.create([1, 2], [1, 0], [1, 0], [1, 0])
    with pytest.raises(DimensionError):
        ModuliQuadruple.create([1, 0], [1, 0, 0], [1, 0], [1, 0])


# ---------------------------------------------------------------- balancing


def test_balancing_identity():
    sol = balancing_solve(BalancingProblem(np.eye(2)))
    assert np.allclose(sol.x, [1, 0]) and np.allclose(sol.y, [1, 0])
    assert sol.r0 == pytest.approx(1)


def test_balancing_worked_example():
    sol = balancing_solve(BalancingProblem(np.diag([2.0, 1.0])))
    assert np.allclose(sol.x, [1, 0], atol=1e-12)
    assert np.allclose(sol.y, [0.5, 0], atol=1e-12)
    assert sol.r0 == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_balancing_random_against_descent(d):
    rng = np.random.default_rng(d)
    A = np.eye(d) + 0.3 * cnormal(rng, d, d)
    p = BalancingProblem(A)
    sol = balancing_solve(p)
    assert max(balancing_residuals(p, sol).values()) <= 1e-9
    for v in balancing_descent(A, rng, starts=5):
        assert projective_distance(v, sol.x) <= 1e-7


def test_balancing_singular():
    with pytest.raises(BalancingError):
        balancing_solve(BalancingProblem(np.diag([1.0, 0.0])))


# ---------------------------------------------------------------- solver


def test_solver_real_identity():
    sp = SP
    rng = np.random.default_rng(4)
    for k in range(sp.n + 1):
        plane = sample_plane(rng, sp, k)
        kappa = solve_fiber(ModuliQuadruple.real(sp.base_x(), sp.base_y()), plane)
        assert np.allclose(kappa.x, sp.base_x()) and np.allclose(kappa.y, sp.base_y())
        if k:
            ref = FiberPoint.create(sp, sp.base_x(), sp.base_y(), plane)
            assert np.allclose(kappa.L.projector(), ref.L.projector(), atol=1e-10)


@pytest.mark.parametrize("l,m,k", [(1, 1, 1), (2, 1, 2), (2, 2, 2), (3, 2, 3), (0, 3, 2), (3, 0, 1)])
def test_solver_residual_and_membership(l, m, k):
    for seed in range(3):
        rng = np.random.default_rng(seed)
        q = sample_quadruple(rng, l, m)
        res = solve_fiber_detailed(q, sample_plane(rng, q.space, k))
        assert res.residual <= 1e-8
        assert member(res.kappa, q)


def test_solver_l0_matches_flag_description():
    rng = np.random.default_rng(5)
    q = sample_quadruple(rng, 0, 3)
    kappa = solve_fiber(q, sample_plane(rng, q.space, 2))
    U, Up = flag_correspondence(kappa)
    # U ⊂ nu^perp and mu ∈ U'
    assert np.max(np.abs(q.nu.conj() @ U.basis)) <= 1e-9 * np.linalg.norm(q.nu)
    assert projective_distance(Up.projector() @ q.mu, q.mu) <= 1e-9


def test_member_negative():
    rng = np.random.default_rng(6)
    kappa = sample_fiber_point(rng, 2, 2, 2)
    q = sample_quadruple(rng, 2, 2)
    assert member_residual(kappa, q) > 1e-3
    assert member(kappa, ModuliQuadruple.real(kappa.x, kappa.y))


def test_gauge_invariance():
    rng = np.random.default_rng(7)
    q = sample_quadruple(rng, 2, 1)
    plane = sample_plane(rng, q.space, 2)
    direct = solve_fiber(q, plane)
    g = Gauge.of(q).g
    assert np.allclose(g.gV @ q.zeta / (g.gV @ q.zeta)[0], q.space.base_x())
    other = solve_fiber_detailed(q, plane, transport=stabilizer_element(11, 2, 1) @ g).kappa
    assert projective_distance(direct.x, other.x) <= 1e-8
    assert projective_distance(direct.y, other.y) <= 1e-8
    assert subspace_distance(direct.L, other.L) <= 1e-8


# ---------------------------------------------------------------- intersection


def example_pair(t=0.5, s=None):
    x0, y0 = SP.base_x(), SP.base_y()
    nu2 = y0 if s is None else np.array([1.0, s])
    return ModuliQuadruple.create(x0, x0, y0, y0), ModuliQuadruple.create(x0, x0, np.array([1.0, t]), nu2)


def test_predicate_examples():
    q1, q2 = example_pair()
    assert intersection_predicate(q1, q1)
    assert intersection_predicate(q1, q2)
    assert not intersection_predicate(*example_pair(s=0.3))


def test_type_examples():
    q1, q2 = example_pair()
    t = intersection_type(q1, q2, 1)
    assert t.tag == IntersectionTag.G_K1_N1
    assert t.grassmannian == (0, 1) and t.dimension == 0
    assert intersection_type(q1, q1, 1).tag == IntersectionTag.IDENTICAL
    assert intersection_type(*example_pair(s=0.3), 1).tag == IntersectionTag.DISJOINT


def test_witness_example():
    q1, q2 = example_pair()
    kappa = schubert_witness(q1, q2, 1)
    assert member_residual(kappa, q1) <= 1e-9 and member_residual(kappa, q2) <= 1e-9
    assert witness_family_dimension(q1, q2, 1) == 0


def test_predicate_false_has_no_witness():
    with pytest.raises(NoIntersectionError):
        schubert_witness(*example_pair(s=0.3), 1)


def test_same_front_family():
    rng = np.random.default_rng(8)
    sp = SpacePair(2, 2)
    q1 = sample_quadruple(rng, 2, 2)
    # moving zeta along the G-perp of xi keeps (xi, zeta) and hence the predicate
    w = cnormal(rng, 3)
    w = w - q1.xi * (np.vdot(q1.xi, sp.form_diagonal()[sp.v_slice] * w)
                     / np.vdot(q1.xi, sp.form_diagonal()[sp.v_slice] * q1.xi))
    q2 = ModuliQuadruple.create(q1.xi, q1.zeta + 0.2 * w, q1.mu, q1.nu)
    k = 2
    t = intersection_type(q1, q2, k)
    assert t.tag == IntersectionTag.G_K_N1
    assert witness_family_dimension(q1, q2, k) == k * (sp.n - 1 - k)
    for kappa in sample_witness_family(q1, q2, k, 3):
        assert member(kappa, q1) and member(kappa, q2)


# ---------------------------------------------------------------- models


def test_m_model_base_point():
    sp = SpacePair(0, 3)
    L = np.zeros((sp.ambient, 2), complex)
    L[sp.w0 + 1, 0] = L[sp.w0 + 2, 1] = 1
    kappa = FiberPoint.create(sp, sp.base_x(), sp.base_y(), L)
    U, Up = flag_correspondence(kappa)
    assert U.dim == 2 and Up.dim == 3
    back = flag_to_fiber(sp, U.basis, Up.basis)
    assert projective_distance(back.y, sp.base_y()) <= 1e-12


def test_l_model_sign_condition():
    sp = SpacePair(2, 0)
    U = np.array([[1.0], [0.0], [0.0]], complex)
    Up = np.eye(3, dtype=complex)[:, :2]
    with pytest.raises(ModelError):
        flag_to_fiber(sp, U, Up)
    with pytest.raises(ModelError):
        flag_correspondence(sample_fiber_point(0, 1, 1, 1))


def test_rank_examples():
    both = sample_fiber_point(9, 2, 2, 1)
    assert rank_stratum(both) == 2
    pure_v = sample_fiber_point(9, 2, 2, 1, pure_v=1)
    assert rank_stratum(pure_v) == 1
    with pytest.raises(DimensionError):
        rank_stratum(sample_fiber_point(9, 2, 2, 2))
