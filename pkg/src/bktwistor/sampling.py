"""Seeded random instances."""
from __future__ import annotations

import zlib

import numpy as np

from .complexification import ModuliQuadruple, _hform
from .errors import TwistorError
from .linalg import SpacePair
from .twistor import FiberPoint, frame_projection

BALL_RADIUS = 0.9
MAX_RETRIES = 64
# reject quadruples with |(mu,nu)| below this fraction of |mu||nu|
MU_NU_FLOOR = 1e-3


class SamplingError(TwistorError):
    """Every retry produced a degenerate draw."""


def stable_key(name) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name)
    return zlib.crc32(str(name).encode())


def sample_rng(master_seed: int, *keys) -> np.random.Generator:
    """Generator for one sample; keys are names or integers (counter scheme)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(stable_key(k) for k in keys))
    return np.random.default_rng(ss)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_normal(rng, *shape) -> np.ndarray:
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def sample_ball(rng, l: int, radius: float = BALL_RADIUS) -> np.ndarray:
    """Chart-normalized x = (1, u), u uniform in the complex l-ball of ``radius``."""
    if l == 0:
        return np.ones(1, complex)
    u = complex_normal(rng, l)
    u *= radius * rng.random() ** (1.0 / (2 * l)) / np.linalg.norm(u)
    return np.concatenate([[1.0], u])


def sample_projective(rng, m: int) -> np.ndarray:
    return complex_normal(rng, m + 1)


def _retry(fn, rng):
    for _ in range(MAX_RETRIES):
        try:
            return fn(rng)
        except TwistorError:
            continue
    raise SamplingError(f"no admissible draw in {MAX_RETRIES} attempts")


def sample_fiber_point(seed, l: int, m: int, k: int, over_base: bool = False,
                       pure_v: int = 0, pure_w: int = 0) -> FiberPoint:
    """Random kappa; L is a Gaussian basis projected into x^perp + y^perp.

    ``pure_v``/``pure_w`` force that many basis vectors into x^perp ∩ V and
    y^perp ∩ W, which reaches the non-generic charts.
    """
    sp = SpacePair(l, m)
    if not 0 <= k <= sp.n or pure_v > l or pure_w > m or pure_v + pure_w > k:
        raise ValueError("invalid (l, m, k) or stratum")
    rng = _rng(seed)

    def draw(rng):
        if over_base:
            x, y = sp.base_x(), sp.base_y()
        else:
            x, y = sample_ball(rng, l), sample_projective(rng, m)
        raw = complex_normal(rng, sp.ambient, k)
        raw[sp.w_slice, :pure_v] = 0
        raw[sp.v_slice, pure_v:pure_v + pure_w] = 0
        basis = frame_projection(sp, x, y) @ raw
        return FiberPoint.create(sp, x, y, basis)

    return _retry(draw, rng)


def sample_plane(seed, space: SpacePair, k: int) -> np.ndarray:
    """Gaussian k-plane in the coordinate directions (ambient basis)."""
    rng = _rng(seed)
    out = np.zeros((space.ambient, k), complex)
    out[space.tangent_positions] = complex_normal(rng, space.n, k)
    return out


def sample_quadruple(seed, l: int, m: int) -> ModuliQuadruple:
    rng = _rng(seed)

    def draw(rng):
        xi, zeta = sample_ball(rng, l), sample_ball(rng, l)
        mu, nu = sample_projective(rng, m), sample_projective(rng, m)
        if abs(_hform(mu, nu)) < MU_NU_FLOOR * np.linalg.norm(mu) * np.linalg.norm(nu):
            raise SamplingError("(mu, nu) too close to 0")
        return ModuliQuadruple.create(xi, zeta, mu, nu)

    return _retry(draw, rng)


def sample_unitary(rng, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), complex)
    q, r = np.linalg.qr(complex_normal(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


__all__ = [
    "BALL_RADIUS", "SamplingError", "sample_rng", "sample_ball", "sample_projective",
    "sample_fiber_point", "sample_plane", "sample_quadruple", "sample_unitary",
    "complex_normal",
]
