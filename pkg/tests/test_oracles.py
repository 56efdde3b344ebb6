import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from bktwistor.linalg import FormKind, form_diagonal
from bktwistor.oracles import (
    clifford_normal_form,
    gram_schmidt_transport,
    plane_from_constraints,
    random_rewrite,
    rewrite_normal_forms,
)


def test_rewrite_examples():
    assert rewrite_normal_forms((2, 1)) == {(-1, (1, 2))}
    assert rewrite_normal_forms((1, 1)) == {(-1, ())}
    assert rewrite_normal_forms(()) == {(1, ())}
    assert rewrite_normal_forms((2, 1, 2)) == {(1, (1,))}


@given(st.lists(st.integers(0, 3), max_size=7), st.integers(0, 2 ** 32 - 1))
def test_oracles_agree(word, seed):
    expected = clifford_normal_form(word)
    assert rewrite_normal_forms(tuple(word)) == {expected}
    assert random_rewrite(word, np.random.default_rng(seed)) == expected


def test_gram_schmidt_transport_is_isometry():
    rng = np.random.default_rng(0)
    x = np.r_[1, 0.4 * (rng.normal(size=2) + 1j * rng.normal(size=2))]
    g = gram_schmidt_transport(x)
    G = np.diag(form_diagonal(FormKind.G, 3))
    assert np.allclose(g.conj().T @ G @ g, G, atol=1e-12)
    assert np.allclose(g[:, 0] * np.sqrt(np.real(np.vdot(x, G @ x))), x)


def test_plane_from_constraints():
    forms = np.array([[1, 0, 0, 0], [0, 1, 1, 0]], complex)
    P = plane_from_constraints(forms)
    assert P.shape == (4, 2) and np.allclose(forms @ P, 0)
