import numpy as np
import pytest

from bktwistor.errors import ChartError, DimensionError
from bktwistor.exterior import GradedTensor, graded_component, wedge_vector
from bktwistor.linalg import SpacePair, random_group_element
from bktwistor.sampling import sample_fiber_point
from bktwistor.twistor import (
    FiberPoint,
    antiholomorphic_residual,
    chart_membership,
    chart_membership_details,
    charts_of,
    component_vector,
    lambda_group,
    lemma_interval,
    phi_intrinsic,
    phi_recursive,
    phi_tensor,
    psi,
    psi_jacobian_rank,
    random_direction,
    twistor_one_forms,
)

SP = SpacePair(1, 1)  # positions: e0=0, e1=1, e0'=2, e1'=3


def unit(sp, p):
    v = np.zeros(sp.ambient, complex)
    v[p] = 1
    return v


def base_point(sp, cols):
    return FiberPoint.create(sp, sp.base_x(), sp.base_y(), np.array(cols, complex).T)


def test_base_identities_at_base():
    kappa = base_point(SP, [unit(SP, 1), unit(SP, 3)])
    z = kappa.z
    for a, b in [(0, 3), (1, 2), (2, 1), (3, 0)]:
        if a + b != 3:
            continue
        rec = phi_recursive(SP, kappa.x, kappa.y, z, a, b)
        assert np.allclose(rec.coeffs, phi_intrinsic(kappa, a, b).coeffs, atol=1e-12)


def test_psi_example_at_base():
    kappa = base_point(SP, [unit(SP, 1), unit(SP, 3)])
    value = psi(kappa, 1, 1)
    phi = phi_tensor(kappa)
    first = graded_component(phi, 2, 1)
    second = graded_component(phi, 1, 2)
    # [phi_{2,1}] ∝ e0 e1 ⊗ e1', [phi_{1,2}] ∝ e1 ⊗ e0' e1'
    assert np.count_nonzero(np.abs(first.coeffs) > 1e-12) == 1
    assert abs(first.coeff_positions([0, 1, 3])) == pytest.approx(1)
    assert np.count_nonzero(np.abs(second.coeffs) > 1e-12) == 1
    assert abs(second.coeff_positions([1, 2, 3])) == pytest.approx(1)
    assert np.count_nonzero(np.abs(value.first) > 1e-12) == 1
    assert np.count_nonzero(np.abs(value.second) > 1e-12) == 1


def test_chart_examples():
    pure_v = base_point(SP, [unit(SP, 1)])
    assert chart_membership(pure_v, 1, 0) and not chart_membership(pure_v, 0, 1)
    assert charts_of(pure_v) == [(1, 0)]
    mixed = base_point(SP, [unit(SP, 1) + unit(SP, 3)])
    assert chart_membership(mixed, 1, 0) and chart_membership(mixed, 0, 1)
    with pytest.raises(ChartError):
        psi(pure_v, 0, 1)
    with pytest.raises(DimensionError):
        psi(pure_v, 1, 1)


def test_pure_v_top_component_is_x_wedge_plane():
    kappa = sample_fiber_point(3, 2, 1, 2, pure_v=2)
    sp = kappa.space
    top = graded_component(phi_tensor(kappa), 3, 0)
    expected = wedge_vector(sp.embed(xv=kappa.x), kappa.plucker())
    assert np.allclose(top.coeffs, graded_component(expected, 3, 0).coeffs, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_psi_rescale_invariant(seed):
    kappa = sample_fiber_point(seed, 2, 2, 2)
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    sp = kappa.space
    basis = kappa.L.basis @ M
    basis[sp.v_slice] *= 2 - 1j
    basis[sp.w_slice] *= 3j
    other = FiberPoint.create(sp, kappa.x * (2 - 1j), kappa.y * 3j, basis)
    for a, b in charts_of(kappa):
        assert psi(kappa, a, b).distance(psi(other, a, b)) <= 1e-10


@pytest.mark.parametrize("l,m,k", [(1, 1, 1), (2, 1, 2), (2, 2, 3), (3, 1, 2)])
def test_recursive_matches_intrinsic(l, m, k):
    for seed in range(4):
        kappa = sample_fiber_point(seed, l, m, k)
        for a in range(k + 2):
            b = k + 1 - a
            rec = phi_recursive(kappa.space, kappa.x, kappa.y, kappa.z, a, b)
            ref = phi_intrinsic(kappa, a, b)
            scale = max(1.0, ref.max_abs())
            assert np.max(np.abs(rec.coeffs - ref.coeffs), initial=0) <= 1e-9 * scale


def test_chart_criteria_agree_on_strata():
    for pv, pw in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)]:
        for seed in range(3):
            kappa = sample_fiber_point(seed, 2, 2, 2, pure_v=pv, pure_w=pw)
            for a in range(3):
                d = chart_membership_details(kappa, a, 2 - a)
                assert d["nonvanishing"] == d["lemma"]
            lo, hi = lemma_interval(kappa)
            assert lo == pv and hi == 2 - pw


def test_fiber_point_validation():
    sp = SP
    with pytest.raises(DimensionError):
        FiberPoint.create(sp, sp.base_x(), sp.base_y(), unit(sp, 0)[:, None])


def test_fiber_point_json_roundtrip():
    kappa = sample_fiber_point(0, 1, 1, 1)
    back = FiberPoint.from_json(kappa.to_json())
    assert np.allclose(back.L.projector(), kappa.L.projector(), atol=1e-12)
    assert np.allclose(back.x, kappa.x) and np.allclose(back.y, kappa.y)


def test_one_forms_extreme_degrees():
    n = SP.n
    k0 = twistor_one_forms(sample_fiber_point(0, 1, 1, 0, over_base=True).z)
    assert np.linalg.matrix_rank(k0[:, :n]) == n and np.allclose(k0[:, n:], 0)
    kn = twistor_one_forms(sample_fiber_point(0, 1, 1, n, over_base=True).z)
    assert np.linalg.matrix_rank(kn[:, n:]) == n and np.allclose(kn[:, :n], 0)


@pytest.mark.parametrize("seed", range(3))
def test_holomorphy(seed):
    kappa = sample_fiber_point(seed, 1, 1, 1, over_base=True)
    rng = np.random.default_rng(seed)
    for a, b in charts_of(kappa):
        assert antiholomorphic_residual(kappa, a, b, random_direction(kappa, rng, "01")) <= 1e-6
        assert antiholomorphic_residual(kappa, a, b, random_direction(kappa, rng, "10")) > 1e-3


def test_jacobian_full_rank():
    kappa = sample_fiber_point(0, 1, 1, 1, over_base=True)
    for a, b in charts_of(kappa):
        rank, expected = psi_jacobian_rank(kappa, a, b)
        assert rank == expected == 6


def test_equivariance():
    kappa = sample_fiber_point(5, 2, 1, 2)
    g = random_group_element(7, 2, 1)
    moved = kappa.act(g)
    for a, b in charts_of(kappa):
        expected = psi(kappa, a, b)
        got = psi(moved, a, b)
        # the component vectors transform by Λ^{k+1} g restricted to the graded piece
        full = phi_tensor(kappa)
        image = GradedTensor(full.space, full.degree, lambda_group(g, full.degree) @ full.coeffs)
        for deg, vec in ((a + 1, got.first), (a, got.second)):
            ref = component_vector(image, deg)
            ref = ref / ref[np.argmax(np.abs(ref))]
            vec = vec / vec[np.argmax(np.abs(vec))]
            assert np.allclose(ref, vec, atol=1e-9)
        assert expected.a == got.a
