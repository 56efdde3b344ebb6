import numpy as np
import pytest

from bktwistor.errors import DimensionError
from bktwistor.flat import (
    FlatFiberPoint,
    FlatSection,
    flat_eval,
    flat_project,
    uniqueness_rank,
)
from bktwistor.linalg import Subspace
from bktwistor.oracles import projection_oracle
from bktwistor.sampling import sample_unitary

from conftest import cnormal


def plane(rng, n, k):
    return Subspace(cnormal(rng, n, k))


def test_zero_section(rng):
    L = plane(rng, 4, 2)
    w = flat_eval(FlatSection.create(np.zeros(4), np.zeros(4)), L)
    assert not np.any(w.beta) and not np.any(w.u)
    assert not np.any(flat_project(FlatFiberPoint.create(L, np.zeros(4), np.zeros(4))))


def test_real_point_inside_plane(rng):
    L = plane(rng, 4, 2)
    v = L.basis @ cnormal(rng, 2)
    w = flat_eval(FlatSection.real(v), L)
    assert np.allclose(w.u, 0, atol=1e-12)
    assert np.allclose(w.beta, v, atol=1e-12)


@pytest.mark.parametrize("n,k", [(1, 0), (1, 1), (3, 1), (4, 2), (5, 3), (6, 6)])
def test_eval_matches_projection_oracle(rng, n, k):
    L = plane(rng, n, k)
    f = FlatSection.create(cnormal(rng, n), cnormal(rng, n))
    w = flat_eval(f, L)
    assert np.allclose(w.u, projection_oracle(L.basis, f.v), atol=1e-12)
    assert np.allclose(w.beta, f.alpha - projection_oracle(L.basis, f.alpha), atol=1e-12)


@pytest.mark.parametrize("n,k", [(2, 1), (4, 2), (5, 0), (5, 5)])
def test_round_trip_and_uniqueness(rng, n, k):
    L = plane(rng, n, k)
    v = cnormal(rng, n)
    w = flat_eval(FlatSection.real(v), L)
    assert np.linalg.norm(flat_project(w) - v) <= 1e-12 * max(1, np.linalg.norm(v))
    assert uniqueness_rank(L) == n
    # random fiber point: project, evaluate again, recover it
    q = L.orthonormal()
    beta = q @ cnormal(rng, k) if k else np.zeros(n, complex)
    u = projection_oracle(L.basis, cnormal(rng, n))
    w = FlatFiberPoint.create(L, beta, u)
    back = flat_eval(FlatSection.real(flat_project(w)), L)
    assert np.allclose(back.beta, beta, atol=1e-12) and np.allclose(back.u, u, atol=1e-12)


def test_non_real_section_not_recovered(rng):
    L = plane(rng, 4, 2)
    f = FlatSection.create(cnormal(rng, 4), cnormal(rng, 4))
    assert not f.is_real()
    v2 = flat_project(flat_eval(f, L))
    assert np.linalg.norm(v2 - f.v) > 1e-6 or np.linalg.norm(v2 - f.alpha) > 1e-6


def test_equivariance(rng):
    n, k = 5, 2
    L = plane(rng, n, k)
    U = sample_unitary(rng, n)
    f = FlatSection.create(cnormal(rng, n), cnormal(rng, n))
    lhs = flat_eval(f.act(U), Subspace(U @ L.basis))
    rhs = flat_eval(f, L).act(U)
    assert np.allclose(lhs.beta, rhs.beta, atol=1e-10) and np.allclose(lhs.u, rhs.u, atol=1e-10)


def test_validation(rng):
    L = plane(rng, 3, 1)
    with pytest.raises(DimensionError):
        FlatFiberPoint.create(L, np.zeros(3), L.basis[:, 0])
    with pytest.raises(DimensionError):
        FlatSection.create(np.zeros(3), np.zeros(2))
    with pytest.raises(DimensionError):
        flat_eval(FlatSection.real(np.zeros(2)), L)


def test_json_roundtrip(rng):
    L = plane(rng, 3, 1)
    f = FlatSection.create(cnormal(rng, 3), cnormal(rng, 3))
    assert np.allclose(FlatSection.from_json(f.to_json()).alpha, f.alpha)
    w = flat_eval(f, L)
    back = FlatFiberPoint.from_json(w.to_json())
    assert np.allclose(back.u, w.u) and np.allclose(back.beta, w.beta)
