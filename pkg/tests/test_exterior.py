import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bktwistor import exact
from bktwistor.errors import DimensionError, RankError
from bktwistor.exterior import (
    GradedTensor,
    apply_linear,
    combos,
    graded_component,
    interior_conjugate,
    lambda_form,
    plucker_of_subspace,
    plucker_relations_exact,
    plucker_residual,
    wedge_vector,
)
from bktwistor.linalg import SpacePair

from conftest import cnormal

C4 = SpacePair(2, 0)  # ambient C^4, positions 0..3 stand for e1..e4


def e(sp, p):
    v = np.zeros(sp.ambient, complex)
    v[p] = 1
    return v


def test_wedge_examples():
    t = wedge_vector(e(C4, 0), GradedTensor.basis(C4, [1]))
    assert t.coeff_positions([0, 1]) == 1
    t = wedge_vector(e(C4, 1), GradedTensor.basis(C4, [0]))
    assert t.coeff_positions([0, 1]) == -1


def test_wedge_matches_minor_oracle(rng):
    sp = SpacePair(3, 1)
    B = cnormal(rng, sp.ambient, 3)
    t = plucker_of_subspace(B[:, 1:], sp)
    direct = wedge_vector(B[:, 0], t)
    assert np.allclose(direct.coeffs, plucker_of_subspace(B, sp).coeffs, atol=1e-12)


def test_interior_examples():
    ones = np.ones(4)
    e12 = GradedTensor.basis(C4, [0, 1])
    assert np.allclose(interior_conjugate(e(C4, 0), e12, ones).coeffs, GradedTensor.basis(C4, [1]).coeffs)
    assert np.allclose(interior_conjugate(e(C4, 1), e12, ones).coeffs, -GradedTensor.basis(C4, [0]).coeffs)
    sp = SpacePair(1, 1)
    t = interior_conjugate(e(sp, 1), GradedTensor.basis(sp, [1]))
    assert t.coeffs[0] == -1


def test_interior_is_adjoint_of_wedge(rng):
    sp = SpacePair(2, 1)
    F = sp.form_diagonal()
    v = cnormal(rng, sp.ambient)
    s = GradedTensor(sp, 2, cnormal(rng, len(combos(sp.ambient, 2))))
    t = GradedTensor(sp, 3, cnormal(rng, len(combos(sp.ambient, 3))))
    lhs = lambda_form(wedge_vector(v, s), t, F)
    rhs = lambda_form(s, interior_conjugate(v, t, F), F)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_plucker_examples():
    t = plucker_of_subspace(np.array([[1, 0], [0, 1], [0, 0], [0, 0]], complex), C4)
    assert t.coeff_positions([0, 1]) == 1
    assert np.count_nonzero(np.abs(t.coeffs) > 0) == 1
    t = plucker_of_subspace(np.array([[1, 0], [0, 1], [1, 0], [0, 0]], complex), C4)
    assert t.coeff_positions([0, 1]) == pytest.approx(1)
    assert t.coeff_positions([1, 2]) == pytest.approx(-1)


def test_three_term_relation_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        B = exact.array([[complex(int(rng.integers(-5, 6)), int(rng.integers(-5, 6))) for _ in range(2)]
                         for _ in range(4)])
        t = plucker_of_subspace(B, C4)
        p = lambda a, b: t.coeff_positions([a, b])
        assert p(0, 1) * p(2, 3) - p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2) == exact.ZERO
        assert all(r == exact.ZERO for r in plucker_relations_exact(t))


def test_residual_detects_non_decomposable():
    t = GradedTensor.basis(C4, [0, 1]) + GradedTensor.basis(C4, [2, 3])
    assert plucker_residual(t) == pytest.approx(1.0)
    with pytest.raises(RankError):
        plucker_residual(GradedTensor.zeros(C4, 2))


@given(st.integers(2, 7), st.data())
def test_residual_small_on_subspaces(n, data):
    k = data.draw(st.integers(0, n))
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 32 - 1)))
    t = plucker_of_subspace(cnormal(rng, n, k), SpacePair(n - 2, 0))
    assert plucker_residual(t) <= 1e-10


def test_rank_deficient_basis():
    with pytest.raises(RankError):
        plucker_of_subspace(np.array([[1, 2], [2, 4], [0, 0], [0, 0]], complex), C4)


def test_graded_components(rng):
    sp = SpacePair(2, 2)
    t = GradedTensor(sp, 3, cnormal(rng, len(combos(sp.ambient, 3))))
    parts = [graded_component(t, a, 3 - a) for a in range(4)]
    assert np.allclose(sum(p.coeffs for p in parts), t.coeffs)
    for a, p in enumerate(parts):
        for idx, c in enumerate(combos(sp.ambient, 3)):
            if sum(1 for q in c if q <= sp.l) != a:
                assert p.coeffs[idx] == 0
    with pytest.raises(DimensionError):
        graded_component(t, 2, 2)


def test_no_pure_v_part():
    sp = SpacePair(1, 1)
    t = GradedTensor.basis(sp, [0, 2])
    assert graded_component(t, 2, 0).is_zero()


def test_lambda_power_matches_plucker(rng):
    sp = SpacePair(2, 1)
    B, M = cnormal(rng, 5, 2), cnormal(rng, 5, 5)
    lhs = apply_linear(M, plucker_of_subspace(B, sp))
    assert np.allclose(lhs.coeffs, plucker_of_subspace(M @ B, sp).coeffs, atol=1e-10)


def test_from_entries_and_json():
    sp = SpacePair(2, 1)
    t = GradedTensor.from_entries(sp, 2, [(((2, 1), ()), 1.5), (((0,), (1,)), 2j)])
    assert t.coeff((1, 2)) == -1.5
    back = GradedTensor.from_json(sp, 2, t.to_json())
    assert np.array_equal(back.coeffs, t.coeffs)
    assert t.to_json()[0]["c"] == [0.0, 2.0] or t.to_json()[0]["c"] == [-1.5, 0.0]


def test_exact_json_uses_decimal_strings():
    sp = SpacePair(1, 0)
    t = GradedTensor.basis(sp, [1], exact_mode=True) * exact.q("1/3")
    item = t.to_json()[0]
    assert all(isinstance(c, str) for c in item["c"])
    back = GradedTensor.from_json(sp, 1, [item], exact_mode=True)
    assert back.coeffs[1] == t.coeffs[1]


def test_basis_rejects_repeats():
    with pytest.raises(DimensionError):
        GradedTensor.basis(C4, [1, 1])


def test_combos_count():
    for n, d in itertools.product(range(2, 7), range(0, 7)):
        assert len(combos(n, d)) == (0 if d > n else len(list(itertools.combinations(range(n), d))))
