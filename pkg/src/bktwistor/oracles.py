"""Independent reference implementations used to cross-check the main code.

None of these are on a production path: they are deliberately written a
different way (bitmask algebra, direct minimization, least squares) so a
shared mistake is unlikely.
"""
from __future__ import annotations

import numpy as np

from .linalg import FormKind, form_diagonal, null_space


def clifford_normal_form(keys) -> tuple[int, tuple]:
    """Sign and sorted word of the product e_{k1} e_{k2} ... with e_i^2 = -1.

    Uses the bitmask rule for products of basis blades: moving e_k past the
    blade B costs (-1)^{#letters of B greater than k}, and e_k e_k = -1.
    """
    sign = 1
    blade = set()
    for key in keys:
        greater = sum(1 for b in blade if b > key)
        if greater % 2:
            sign = -sign
        if key in blade:
            blade.remove(key)
            sign = -sign
        else:
            blade.add(key)
    return sign, tuple(sorted(blade))


def rewrite_normal_forms(keys, memo=None) -> set:
    """Every (sign, word) reachable by some complete reduction sequence.

    Explores all orders of applying the two rules (contract an adjacent
    equal pair, swap an adjacent descending pair).  Confluence means the
    returned set has exactly one element.  ``memo`` may be shared across
    calls; subwords recur constantly when enumerating exhaustively.
    """
    if memo is None:
        memo = {}
    word = tuple(keys)
    hit = memo.get(word)
    if hit is not None:
        return hit
    out = set()
    for i in range(len(word) - 1):
        a, b = word[i], word[i + 1]
        if a == b:
            nxt = word[:i] + word[i + 2:]
        elif a > b:
            nxt = word[:i] + (b, a) + word[i + 2:]
        else:
            continue
        out.update((-s, w) for s, w in rewrite_normal_forms(nxt, memo))
    if not out:
        out = {(1, word)}
    memo[word] = out
    return out


def random_rewrite(keys, rng) -> tuple[int, tuple]:
    """Reduce by applying a uniformly chosen applicable rule at each step."""
    word = list(keys)
    sign = 1
    while True:
        moves = [i for i in range(len(word) - 1) if word[i] >= word[i + 1]]
        if not moves:
            return sign, tuple(word)
        i = moves[rng.integers(len(moves))]
        if word[i] == word[i + 1]:
            del word[i:i + 2]
        else:
            word[i], word[i + 1] = word[i + 1], word[i]
        sign = -sign


def balancing_descent(A: np.ndarray, rng, starts: int = 20, tol: float = 1e-9, max_iter: int = 200):
    """Minimize (A^-1 v, A^-1 v) on the hyperboloid (v, v)_G = 1 directly.

    The hyperboloid (mod phase) is parametrized by r in R^{2k} through
    v = (sqrt(1 + |r|^2), r_re + i r_im), which makes the problem
    unconstrained:

        f(r) = M00 (1 + r.r) + 2 s c.r + r.K r,   s = sqrt(1 + r.r)

    It is minimized by damped Newton steps (Levenberg-shifted where the
    Hessian is not positive definite) with Armijo backtracking, stopping one
    step after the Newton step drops below ``tol``.  Returns one minimizer
    per random start.
    """
    A = np.asarray(A, dtype=complex)
    d = A.shape[0]
    k = d - 1
    if k == 0:
        return [np.array([1.0 + 0j]) for _ in range(starts)]
    Ainv = np.linalg.inv(A)
    M = Ainv.conj().T @ Ainv
    m00 = float(np.real(M[0, 0]))
    m = M[1:, 0]
    c = np.concatenate([m.real, m.imag])
    M11 = M[1:, 1:]
    K = np.block([[M11.real, -M11.imag], [M11.imag, M11.real]])
    eye = np.eye(2 * k)

    def parts(r):
        s = np.sqrt(1.0 + r @ r)
        cr = c @ r
        f = m00 * (1.0 + r @ r) + 2 * s * cr + r @ K @ r
        g = 2 * m00 * r + 2 * s * c + 2 * cr * r / s + 2 * K @ r
        H = (2 * m00 * eye + 2 * K + 2 * (np.outer(c, r) + np.outer(r, c)) / s
             + 2 * cr * (eye / s - np.outer(r, r) / s ** 3))
        return f, g, H

    out = []
    for _ in range(starts):
        r = rng.normal(size=2 * k)
        f, g, H = parts(r)
        for _ in range(max_iter):
            shift = 0.0
            while True:
                try:
                    np.linalg.cholesky(H + shift * eye)
                    break
                except np.linalg.LinAlgError:
                    shift = max(2 * shift, 1e-3 * np.linalg.norm(H))
            step = -np.linalg.solve(H + shift * eye, g)
            newton = shift == 0.0
            converged = newton and np.linalg.norm(step) <= tol * (1.0 + np.linalg.norm(r))
            t = 1.0
            while t > 1e-10:
                f_new, g_new, H_new = parts(r + t * step)
                if f_new <= f + 1e-4 * t * (g @ step):
                    break
                # near the minimum f is flat to rounding; judge by the gradient
                if newton and t == 1.0 and np.linalg.norm(g_new) < np.linalg.norm(g):
                    break
                t *= 0.5
            else:
                break
            r, f, g, H = r + t * step, f_new, g_new, H_new
            if converged:
                # quadratic convergence: the error is now ~ tol^2
                break
        out.append(np.concatenate([[np.sqrt(1.0 + r @ r)], r[:k] + 1j * r[k:]]))
    return out


def gram_schmidt_transport(x: np.ndarray) -> np.ndarray:
    """Some element of U(1,l) with first column x/sqrt((x,x)_G), by indefinite
    Gram-Schmidt on (x, e_1, ..., e_l)."""
    x = np.asarray(x, dtype=complex)
    d = len(x)
    G = form_diagonal(FormKind.G, d)
    cols = [x / np.sqrt(np.real(np.vdot(x, G * x)))]
    for i in range(1, d):
        v = np.zeros(d, complex)
        v[i] = 1
        for c in cols:
            v = v - c * np.vdot(c, G * v) / np.real(np.vdot(c, G * c))
        cols.append(v / np.sqrt(abs(np.real(np.vdot(v, G * v)))))
    return np.array(cols).T


def projection_oracle(L: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Component of v orthogonal to span(L), by least squares."""
    if L.shape[1] == 0:
        return np.asarray(v, dtype=complex)
    c, *_ = np.linalg.lstsq(L, v, rcond=None)
    return v - L @ c


def plane_from_constraints(forms: np.ndarray) -> np.ndarray:
    return null_space(forms)
