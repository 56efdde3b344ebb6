"""Flat twistor correspondence for M = C^n.

Sections of the normal bundle over G_{k,n} are pairs f = (alpha, v) in
conj(C^n) x C^n.  A conjugate-linear functional is stored as the vector it
pairs against, so alpha = a means u -> <u, a> = a^* u, and the real slice
(points of M) is alpha = v.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .linalg import Subspace, numerical_rank

PERP_TOL = 1e-10


@dataclass(frozen=True)
class FlatSection:
    alpha: np.ndarray
    v: np.ndarray

    @classmethod
    def create(cls, alpha, v) -> "FlatSection":
        alpha = np.asarray(alpha, dtype=complex)
        v = np.asarray(v, dtype=complex)
        if alpha.shape != v.shape or alpha.ndim != 1:
            raise DimensionError("alpha and v must be vectors of the same length")
        return cls(alpha, v)

    @classmethod
    def real(cls, v) -> "FlatSection":
        """The section (v̄, v) attached to the point v of M."""
        return cls.create(v, v)

    @property
    def n(self) -> int:
        return len(self.v)

    def is_real(self, tol: float = 1e-12) -> bool:
        return np.linalg.norm(self.alpha - self.v) <= tol * max(1.0, np.linalg.norm(self.v))

    def act(self, U: np.ndarray) -> "FlatSection":
        return FlatSection(U @ self.alpha, U @ self.v)

    def to_json(self) -> dict:
        pair = lambda x: [[float(c.real), float(c.imag)] for c in x]
        return {"alpha": pair(self.alpha), "v": pair(self.v)}

    @classmethod
    def from_json(cls, obj) -> "FlatSection":
        vec = lambda x: np.array([complex(a, b) for a, b in x])
        return cls.create(vec(obj["alpha"]), vec(obj["v"]))


@dataclass(frozen=True)
class FlatFiberPoint:
    """A point of N over L: beta a functional on L (stored in L), u in L^perp."""

    L: Subspace
    beta: np.ndarray
    u: np.ndarray

    @classmethod
    def create(cls, L, beta, u, tol: float = PERP_TOL) -> "FlatFiberPoint":
        L = L if isinstance(L, Subspace) else Subspace(np.asarray(L, dtype=complex))
        beta = np.asarray(beta, dtype=complex)
        u = np.asarray(u, dtype=complex)
        q = L.orthonormal()
        scale = max(1.0, np.linalg.norm(u))
        if L.dim and np.linalg.norm(q.conj().T @ u) > tol * scale:
            raise DimensionError("u is not orthogonal to L")
        if np.linalg.norm(beta - q @ (q.conj().T @ beta)) > tol * max(1.0, np.linalg.norm(beta)):
            raise DimensionError("beta is not stored inside L")
        return cls(L, beta, u)

    def act(self, U: np.ndarray) -> "FlatFiberPoint":
        return FlatFiberPoint(Subspace(U @ self.L.basis), U @ self.beta, U @ self.u)

    def to_json(self) -> dict:
        pair = lambda x: [[float(c.real), float(c.imag)] for c in x]
        return {"L": [pair(c) for c in self.L.basis.T], "beta": pair(self.beta), "u": pair(self.u)}

    @classmethod
    def from_json(cls, obj) -> "FlatFiberPoint":
        vec = lambda x: np.array([complex(a, b) for a, b in x])
        u = vec(obj["u"])
        cols = [vec(c) for c in obj["L"]]
        basis = np.array(cols).T if cols else np.zeros((len(u), 0), complex)
        return cls.create(Subspace(basis), vec(obj["beta"]), u)


def flat_eval(f: FlatSection, L: Subspace) -> FlatFiberPoint:
    """Restrict alpha to L and project v onto L^perp."""
    if L.ambient != f.n:
        raise DimensionError("L and f live in different spaces")
    q = L.orthonormal()
    beta = q @ (q.conj().T @ f.alpha)
    u = f.v - q @ (q.conj().T @ f.v)
    return FlatFiberPoint(L, beta, u)


def flat_project(w: FlatFiberPoint) -> np.ndarray:
    """The unique v with flat_eval((v̄, v), L) = w."""
    return w.beta + w.u


def uniqueness_rank(L: Subspace) -> int:
    """Rank of v -> (P_L v, (1 - P_L) v); equal to n iff the solution is unique."""
    P = L.projector()
    n = L.ambient
    return numerical_rank(np.vstack([P, np.eye(n) - P]))
