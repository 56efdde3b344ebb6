"""Deterministic verification suites and their JSON reports.

Every sample draws from its own generator, seeded from (master seed, suite,
check, sample index), so a failure is reproducible on its own and adding or
removing checks never shifts the draws of the others.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import exact
from .complexification import (
    MEMBER_TOL,
    BalancingProblem,
    IntersectionTag,
    ModuliQuadruple,
    Phi,
    Phi_tensor,
    _gform,
    _hform,
    balancing_residuals,
    balancing_solve,
    cross_ratios,
    flag_correspondence,
    flag_to_fiber,
    intersection_predicate,
    intersection_type,
    member_residual,
    rank_stratum,
    schubert_witness,
    solve_fiber_detailed,
    witness_family_dimension,
)
from .errors import ModelError, NoIntersectionError, TwistorError
from .exterior import (
    GradedTensor,
    apply_linear,
    combos,
    graded_component,
    plucker_of_subspace,
    plucker_relations_exact,
    plucker_residual,
    v_degrees,
    zero_free,
)
from .flat import FlatSection, flat_eval, flat_project, uniqueness_rank
from .indices import _W_OFFSET, normalize_keys
from .linalg import (
    SpacePair,
    Subspace,
    null_space,
    projective_distance,
    random_group_element,
    stabilizer_element,
    subspace_distance,
    transport_to_base,
)
from .oracles import (
    balancing_descent,
    clifford_normal_form,
    projection_oracle,
    random_rewrite,
    rewrite_normal_forms,
)
from .sampling import (
    MAX_RETRIES,
    SamplingError,
    complex_normal,
    sample_ball,
    sample_fiber_point,
    sample_plane,
    sample_projective,
    sample_quadruple,
    sample_rng,
    sample_unitary,
)
from .twistor import (
    FiberPoint,
    antiholomorphic_residual,
    chart_membership_details,
    charts_of,
    frame_projection,
    phi_intrinsic,
    phi_recursive,
    psi,
    psi_jacobian_rank,
    random_direction,
)

SCHEMA = 1
MAX_LM = 6
MAX_SAMPLES = 10 ** 6
MAX_FAILURE_RECORDS = 20
# duality distances are divided by max(1, condition * DUAL_COND_SCALE)
DUAL_COND_SCALE = 1e-4


class ConfigError(ValueError):
    """Invalid suite configuration."""


class Skip(Exception):
    """A sample that does not apply (recorded as skipped)."""


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    l: int = 1
    m: int = 1
    k: Optional[int] = None
    samples: int = 100
    seed: int = 0
    tol: Optional[float] = None
    backend: str = "float"
    out: Optional[str] = None

    def validate(self) -> "SuiteConfig":
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; registered: {', '.join(SUITES)}")
        if not (0 <= self.l <= MAX_LM and 0 <= self.m <= MAX_LM):
            raise ConfigError(f"need 0 <= l, m <= {MAX_LM}")
        if not 1 <= self.samples <= MAX_SAMPLES:
            raise ConfigError(f"need 1 <= samples <= {MAX_SAMPLES}")
        if self.k is not None and not 0 <= self.k <= self.l + self.m:
            raise ConfigError("need 0 <= k <= l + m")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.tol is not None and not (self.tol >= 0 and math.isfinite(self.tol)):
            raise ConfigError("tolerance must be a non-negative number")
        if self.backend not in ("float", "exact"):
            raise ConfigError("backend is 'float' or 'exact'")
        if self.backend == "exact" and self.suite not in EXACT_SUITES:
            raise ConfigError(f"suite {self.suite!r} has no exact backend "
                              f"(available for {', '.join(sorted(EXACT_SUITES))})")
        return self

    @property
    def space(self) -> SpacePair:
        return SpacePair(self.l, self.m)

    @property
    def ks(self) -> list:
        n = self.l + self.m
        return list(range(n + 1)) if self.k is None else [self.k]

    def to_json(self) -> dict:
        return {"suite": self.suite, "l": self.l, "m": self.m, "k": self.k,
                "samples": self.samples, "seed": self.seed, "tol": self.tol,
                "backend": self.backend}


# ---------------------------------------------------------------- records


def _num(x):
    """JSON-safe number: non-finite floats become strings."""
    if x is None:
        return None
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


@dataclass
class CheckRecord:
    """Residual statistics for one check.

    ``mode`` is "max" when the residual must stay at or below ``tol`` and
    "min" when the value must stay at or above it (separations).
    """

    name: str
    tol: float
    mode: str = "max"
    samples: int = 0
    skipped: int = 0
    worst: Optional[float] = None
    failure_count: int = 0
    failures: list = field(default_factory=list)

    def ok(self, value: float) -> bool:
        if not math.isfinite(value):
            return False
        return value <= self.tol if self.mode == "max" else value >= self.tol

    def add(self, suite: str, seed: int, index: int, value: float, detail=None) -> None:
        value = float(value)
        self.samples += 1
        if self.worst is None or (math.isfinite(self.worst) and (
                not math.isfinite(value)
                or (value > self.worst if self.mode == "max" else value < self.worst))):
            self.worst = value
        if not self.ok(value):
            self.failure_count += 1
            if len(self.failures) < MAX_FAILURE_RECORDS:
                rec = {"index": index, "value": _num(value),
                       "reproducer": {"suite": suite, "seed": seed, "check": self.name, "index": index}}
                if detail is not None:
                    rec["detail"] = detail
                self.failures.append(rec)

    def merge(self, other: "CheckRecord") -> "CheckRecord":
        """Associative merge of two partial records of the same check."""
        out = CheckRecord(self.name, self.tol, self.mode, self.samples + other.samples,
                          self.skipped + other.skipped, None,
                          self.failure_count + other.failure_count)
        vals = [v for v in (self.worst, other.worst) if v is not None]
        if vals:
            bad = [v for v in vals if not math.isfinite(v)]
            out.worst = bad[0] if bad else (max(vals) if self.mode == "max" else min(vals))
        fails = sorted(self.failures + other.failures, key=lambda r: r["index"])
        out.failures = fails[:MAX_FAILURE_RECORDS]
        return out

    def to_json(self) -> dict:
        key = "max_residual" if self.mode == "max" else "min_value"
        return {"name": self.name, "tol": _num(self.tol), "mode": self.mode,
                "samples": self.samples, "skipped": self.skipped, key: _num(self.worst),
                "failure_count": self.failure_count, "failures": self.failures}


@dataclass
class Report:
    config: SuiteConfig
    checks: list
    wall_time: float = 0.0

    @property
    def failures(self) -> int:
        return sum(c.failure_count for c in self.checks)

    @property
    def verdict(self) -> str:
        return "pass" if self.failures == 0 else "fail"

    def body(self) -> dict:
        return {
            "schema": SCHEMA,
            "suite": self.config.suite,
            "config": self.config.to_json(),
            "checks": [c.to_json() for c in self.checks],
            "summary": {"checks": len(self.checks),
                        "samples": sum(c.samples for c in self.checks),
                        "skipped": sum(c.skipped for c in self.checks),
                        "failures": self.failures},
            "verdict": self.verdict,
        }

    def body_json(self) -> str:
        return json.dumps(self.body(), sort_keys=True)

    def to_json(self) -> dict:
        out = self.body()
        out["wall_time"] = round(self.wall_time, 6)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


# ---------------------------------------------------------------- runner


_CAUGHT = (TwistorError, ValueError, ArithmeticError, np.linalg.LinAlgError)


class SuiteRun:
    """Collects check records for one suite execution."""

    def __init__(self, cfg: SuiteConfig):
        self.cfg = cfg
        self.records: dict = {}

    @property
    def exact(self) -> bool:
        return self.cfg.backend == "exact"

    def tol(self, default: float) -> float:
        return default if self.cfg.tol is None else self.cfg.tol

    def rng(self, name: str, index: int) -> np.random.Generator:
        return sample_rng(self.cfg.seed, self.cfg.suite, name, index)

    def record(self, name: str, tol: float, mode: str = "max") -> CheckRecord:
        if name not in self.records:
            self.records[name] = CheckRecord(name, tol, mode)
        return self.records[name]

    def _add(self, rec: CheckRecord, index: int, out) -> None:
        if out is None:
            rec.skipped += 1
            return
        value, detail = out if isinstance(out, tuple) else (out, None)
        rec.add(self.cfg.suite, self.cfg.seed, index, value, detail)

    def check(self, name: str, count: int, fn: Callable, tol: float, mode: str = "max") -> None:
        """Run ``fn(rng, index)`` for each sample; it returns a value or (value, detail)."""
        rec = self.record(name, tol, mode)
        for i in range(count):
            try:
                out = fn(self.rng(name, i), i)
            except (SamplingError, Skip):
                out = None
            except _CAUGHT as exc:
                out = (float("inf"), f"{type(exc).__name__}: {exc}")
            self._add(rec, i, out)

    def group(self, group: str, count: int, fn: Callable, specs: dict) -> None:
        """Several checks sharing one draw per sample.

        ``specs`` maps check name -> (tol, mode); ``fn`` returns a dict from
        check name to value or (value, detail).  Checks missing from the dict
        do not apply to that sample and are not counted; None marks a skip.
        """
        recs = {name: self.record(name, tol, mode) for name, (tol, mode) in specs.items()}
        for i in range(count):
            try:
                outs = fn(self.rng(group, i), i)
            except (SamplingError, Skip):
                outs = {name: None for name in recs}
            except _CAUGHT as exc:
                err = (float("inf"), f"{type(exc).__name__}: {exc}")
                outs = {name: err for name in recs}
            for name, rec in recs.items():
                if name in outs:
                    self._add(rec, i, outs[name])

    def aggregate(self, name: str, value: float, tol: float, mode: str, samples: int, skipped: int = 0) -> None:
        rec = self.record(name, tol, mode)
        rec.skipped += skipped
        rec.add(self.cfg.suite, self.cfg.seed, 0, value)
        rec.samples = samples


def retry(rng, draw: Callable):
    """Resample a degenerate instance up to MAX_RETRIES times."""
    for _ in range(MAX_RETRIES):
        try:
            return draw(rng)
        except TwistorError:
            continue
    raise SamplingError("no admissible draw")


def run_suite(cfg: SuiteConfig) -> Report:
    cfg.validate()
    start = time.perf_counter()
    run = SuiteRun(cfg)
    SUITES[cfg.suite](run)
    return Report(cfg, list(run.records.values()), time.perf_counter() - start)


# ---------------------------------------------------------------- helpers


def _fiber_distance(k1: FiberPoint, k2: FiberPoint) -> float:
    return max(projective_distance(k1.x, k2.x), projective_distance(k1.y, k2.y),
               subspace_distance(k1.L, k2.L))


def _gradings(sp: SpacePair, degree: int) -> list:
    """All (a, b) with a + b = degree, a <= l + 1, b <= m + 1."""
    return [(a, degree - a) for a in range(degree + 1) if a <= sp.dim_v and degree - a <= sp.dim_w]


def _random_z(rng, sp: SpacePair, k: int, exact_mode: bool = False) -> GradedTensor:
    """Random degree-k tensor over the coordinate directions."""
    mask = zero_free(sp.l, sp.m, k)
    if exact_mode:
        t = GradedTensor.zeros(sp, k, exact_mode=True)
        for i in np.flatnonzero(mask):
            t.coeffs[i] = exact.q(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        return t
    coeffs = complex_normal(rng, len(mask))
    coeffs[~mask] = 0
    return GradedTensor(sp, k, coeffs)


def _exact_point(rng, sp: SpacePair):
    """Chart-normalized Gaussian-rational x in the ball and y."""
    den = 8 * max(sp.l, 1)
    x = [exact.ONE] + [exact.q(f"{rng.integers(-3, 4)}/{den}", f"{rng.integers(-3, 4)}/{den}")
                       for _ in range(sp.l)]
    y = [exact.ONE] + [exact.q(int(rng.integers(-2, 3)), int(rng.integers(-2, 3))) for _ in range(sp.m)]
    return exact.array(x), exact.array(y)


def _diff(t1: GradedTensor, t2: GradedTensor, exact_mode: bool) -> float:
    if exact_mode:
        return float(sum(1 for a, b in zip(t1.coeffs, t2.coeffs) if a != b))
    return float(np.max(np.abs(t1.coeffs - t2.coeffs), initial=0.0))


def _relative(t1: GradedTensor, t2: GradedTensor) -> float:
    scale = max(1.0, t1.max_abs(), t2.max_abs())
    return _diff(t1, t2, False) / scale


def _full_recursive(sp: SpacePair, x, y, z: GradedTensor) -> GradedTensor:
    out = GradedTensor.zeros(sp, z.degree + 1)
    for a, b in _gradings(sp, z.degree + 1):
        out = out + phi_recursive(sp, x, y, z, a, b)
    return out


def _projective_components(t1: GradedTensor, t2: GradedTensor) -> float:
    """Max projective distance between matching (a, b) components (both nonzero)."""
    worst = 0.0
    degs = v_degrees(t1.space.l, t1.space.m, t1.degree)
    for a in range(t1.degree + 1):
        sel = degs == a
        u, v = t1.coeffs[sel], t2.coeffs[sel]
        nu, nv = np.max(np.abs(u), initial=0), np.max(np.abs(v), initial=0)
        scale = max(t1.max_abs(), t2.max_abs())
        if nu <= 1e-9 * scale and nv <= 1e-9 * scale:
            continue
        if nu <= 1e-9 * scale or nv <= 1e-9 * scale:
            return float("inf")
        worst = max(worst, projective_distance(u, v))
    return worst


def _group_seed(rng) -> int:
    return int(rng.integers(2 ** 32))


# ---------------------------------------------------------------- index-confluence


def _letters(l: int, m: int) -> list:
    return list(range(l + 1)) + [_W_OFFSET + j for j in range(m + 1)]


def suite_index_confluence(run: SuiteRun) -> None:
    cfg = run.cfg
    alphabet = [0, 1, _W_OFFSET, _W_OFFSET + 1]
    words = [w for n in range(7) for w in itertools.product(alphabet, repeat=n)]
    memo: dict = {}

    def agree(word, rng, all_orders):
        ref = normalize_keys(word)
        bad = clifford_normal_form(word) != ref or random_rewrite(word, rng) != ref
        if all_orders:
            bad = bad or rewrite_normal_forms(word, memo) != {ref}
        return (float(bad), {"word": list(word)}) if bad else 0.0

    run.check("exhaustive-length-6", len(words), lambda rng, i: agree(words[i], rng, True), tol=0.0)

    letters = _letters(max(cfg.l, 1), max(cfg.m, 1))

    def random_long(rng, i):
        word = tuple(rng.choice(letters, size=int(rng.integers(7, 17))).tolist())
        return agree(word, rng, False)

    run.check("random-long", cfg.samples, random_long, tol=0.0)

    small = letters[:5]

    def random_all_orders(rng, i):
        word = tuple(rng.choice(small, size=int(rng.integers(0, 9))).tolist())
        return agree(word, rng, True)

    run.check("all-orders-length-8", min(cfg.samples, 2000), random_all_orders, tol=0.0)

    def swap_involution(rng, i):
        word = list(rng.choice(letters, size=int(rng.integers(2, 10))).tolist())
        pos = [p for p in range(len(word) - 1) if word[p] != word[p + 1]]
        if not pos:
            raise Skip
        p = pos[rng.integers(len(pos))]
        s0, r0 = normalize_keys(word)
        word[p], word[p + 1] = word[p + 1], word[p]
        s1, r1 = normalize_keys(word)
        return float(s1 != -s0 or r1 != r0)

    run.check("swap-involution", cfg.samples, swap_involution, tol=0.0)

    def concatenation(rng, i):
        I = rng.choice(letters, size=int(rng.integers(0, 8))).tolist()
        J = rng.choice(letters, size=int(rng.integers(0, 8))).tolist()
        sI, rI = normalize_keys(I)
        sJ, rJ = normalize_keys(J)
        sIJ, rIJ = normalize_keys(list(rI) + list(rJ))
        return float((sI * sJ * sIJ, rIJ) != normalize_keys(I + J))

    run.check("concatenation", cfg.samples, concatenation, tol=0.0)


# ---------------------------------------------------------------- plucker


def suite_plucker(run: SuiteRun) -> None:
    cfg = run.cfg
    n_max = cfg.l + cfg.m + 2
    if run.exact:
        _plucker_exact(run, n_max)
        return
    tol = run.tol(1e-10)
    for n in range(2, n_max + 1):
        sp = SpacePair(n - 2, 0)
        for k in (range(n + 1) if cfg.k is None else [k for k in [cfg.k] if k <= n]):
            def residual(rng, i, k=k, sp=sp, n=n):
                B = complex_normal(rng, n, k)
                return plucker_residual(plucker_of_subspace(B, sp))

            run.check(f"residual[n={n},k={k}]", cfg.samples, residual, tol)
        if n >= 4 and (cfg.k is None or cfg.k == 2):
            def detect(rng, i, sp=sp, n=n):
                t = plucker_of_subspace(complex_normal(rng, n, 2), sp) + plucker_of_subspace(
                    complex_normal(rng, n, 2), sp)
                return plucker_residual(t)

            run.check(f"non-decomposable[n={n},k=2]", min(cfg.samples, 200), detect, 1e-6, mode="min")

    sp4 = SpacePair(2, 0)

    def three_term(rng, i):
        def draw(rng):
            B = exact.array([[complex(int(rng.integers(-5, 6)), int(rng.integers(-5, 6)))
                              for _ in range(2)] for _ in range(4)])
            return plucker_of_subspace(B, sp4)

        t = retry(rng, draw)
        p = lambda a, b: t.coeff_positions([a, b])
        rel = p(0, 1) * p(2, 3) - p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2)
        return float(rel != exact.ZERO)

    run.check("three-term-G(2,4)-exact", min(cfg.samples, 1000), three_term, 0.0)


def _plucker_exact(run: SuiteRun, n_max: int) -> None:
    cfg = run.cfg
    for n in range(2, min(n_max, 6) + 1):
        sp = SpacePair(n - 2, 0)
        for k in (range(n + 1) if cfg.k is None else [k for k in [cfg.k] if k <= n]):
            def relations(rng, i, k=k, sp=sp, n=n):
                def draw(rng):
                    B = exact.array([[complex(int(rng.integers(-4, 5)), int(rng.integers(-4, 5)))
                                      for _ in range(k)] for _ in range(n)])
                    return plucker_of_subspace(B, sp)

                t = retry(rng, draw)
                return float(sum(1 for r in plucker_relations_exact(t) if r != exact.ZERO))

            run.check(f"exact-relations[n={n},k={k}]", min(cfg.samples, 200), relations, 0.0)


# ---------------------------------------------------------------- base-identities


def _base_expected(z: GradedTensor, a: int, b: int) -> GradedTensor:
    """phi_{a,b} at the base point read off the sign rules directly:
    phi_{0I,J} = z^{IJ'}, phi_{I,0J} = (-1)^{|I|} z^{IJ'}, the rest vanish."""
    sp = z.space
    out = GradedTensor.zeros(sp, z.degree + 1, exact_mode=z.is_exact)
    degs = v_degrees(sp.l, sp.m, z.degree + 1)
    w0 = sp.w0
    for idx, c in enumerate(combos(sp.ambient, z.degree + 1)):
        if degs[idx] != a:
            continue
        has0, has0w = 0 in c, w0 in c
        if has0 == has0w:
            continue
        rest = [p for p in c if p not in (0, w0)]
        val = z.coeff_positions(rest)
        if has0w and sum(1 for p in rest if p <= sp.l) % 2:
            val = -val
        out.coeffs[idx] = val
    return out


def suite_base_identities(run: SuiteRun) -> None:
    cfg, sp = run.cfg, run.cfg.space
    ex = run.exact
    tol = run.tol(0.0 if ex else 1e-12)
    for k in cfg.ks:
        for a, b in _gradings(sp, k + 1):
            def base(rng, i, k=k, a=a, b=b):
                z = _random_z(rng, sp, k, ex)
                x, y = (exact.array(sp.base_x()), exact.array(sp.base_y())) if ex else (sp.base_x(), sp.base_y())
                return _diff(phi_recursive(sp, x, y, z, a, b), _base_expected(z, a, b), ex)

            run.check(f"base[k={k},a={a},b={b}]", cfg.samples, base, tol)

        def linearity(rng, i, k=k):
            z1, z2 = _random_z(rng, sp, k, ex), _random_z(rng, sp, k, ex)
            if ex:
                x, y = _exact_point(rng, sp)
                c1 = exact.q(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
                c2 = exact.q(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
            else:
                x, y = sample_ball(rng, sp.l), sample_projective(rng, sp.m)
                y = y / y[0]
                y[0] = 1
                c1, c2 = complex_normal(rng, 2)
            worst = 0.0
            for a, b in _gradings(sp, k + 1):
                lhs = phi_recursive(sp, x, y, z1 * c1 + z2 * c2, a, b)
                rhs = phi_recursive(sp, x, y, z1, a, b) * c1 + phi_recursive(sp, x, y, z2, a, b) * c2
                worst = max(worst, _diff(lhs, rhs, ex) if ex else _relative(lhs, rhs))
            return worst

        run.check(f"linearity[k={k}]", cfg.samples, linearity, run.tol(0.0 if ex else 1e-12))


# ---------------------------------------------------------------- frame-consistency


def _gauge_display(quad: ModuliQuadruple, z: GradedTensor) -> GradedTensor:
    """(xi + mu) ^ z expanded by hand, valid when zeta, nu are the base point."""
    sp = quad.space
    coef = np.concatenate([quad.xi, quad.mu])
    out = GradedTensor.zeros(sp, z.degree + 1)
    for idx, c in enumerate(combos(sp.ambient, z.degree + 1)):
        acc = 0j
        for r, p in enumerate(c):
            acc += (-1) ** r * coef[p] * z.coeff_positions([q for q in c if q != p])
        out.coeffs[idx] = acc
    return out


def suite_frame_consistency(run: SuiteRun) -> None:
    cfg, sp = run.cfg, run.cfg.space
    l, m = cfg.l, cfg.m
    for k in cfg.ks:
        grads = _gradings(sp, k + 1)

        def rec_vs_intrinsic(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k)
            return max(_relative(phi_recursive(sp, kappa.x, kappa.y, kappa.z, a, b), phi_intrinsic(kappa, a, b))
                       for a, b in grads)

        run.check(f"recursive-vs-intrinsic[k={k}]", cfg.samples, rec_vs_intrinsic, run.tol(1e-10))

        def complexified(rng, i, k=k):
            quad = sample_quadruple(rng, l, m)
            z = _random_z(rng, sp, k)
            full = Phi_tensor(quad, z)
            return max(_relative(Phi(quad, z, a, b), graded_component(full, a, b)) for a, b in grads)

        run.check(f"complexified-recursion[k={k}]", cfg.samples, complexified, run.tol(1e-10))

        def real_slice(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k)
            quad = ModuliQuadruple.real(kappa.x, kappa.y)
            return max(_relative(Phi(quad, kappa.z, a, b), phi_intrinsic(kappa, a, b)) for a, b in grads)

        run.check(f"real-slice[k={k}]", cfg.samples, real_slice, run.tol(1e-10))

        def gauge_display(rng, i, k=k):
            xi, mu = sample_ball(rng, l), sample_projective(rng, m)
            if abs(mu[0]) < 1e-3:
                raise Skip
            quad = ModuliQuadruple.create(xi, sp.base_x(), mu, sp.base_y())
            z = _random_z(rng, sp, k)
            expected = _gauge_display(quad, z)
            return max(_relative(Phi(quad, z, a, b), graded_component(expected, a, b)) for a, b in grads)

        run.check(f"gauge-display[k={k}]", cfg.samples, gauge_display, run.tol(1e-10))

        def equivariance(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k)
            g = random_group_element(_group_seed(rng), l, m)
            moved = kappa.act(g)
            lhs = _full_recursive(sp, moved.x, moved.y, moved.z)
            rhs = apply_linear(g.block(), _full_recursive(sp, kappa.x, kappa.y, kappa.z))
            return _projective_components(lhs, rhs)

        run.check(f"equivariance[k={k}]", cfg.samples, equivariance, run.tol(1e-9))

        def stabilizer(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k, over_base=True)
            g = stabilizer_element(_group_seed(rng), l, m)
            moved = kappa.act(g)
            lhs = _full_recursive(sp, moved.x, moved.y, moved.z)
            rhs = apply_linear(g.block(), _full_recursive(sp, kappa.x, kappa.y, kappa.z))
            return _projective_components(lhs, rhs)

        run.check(f"stabilizer-equivariance[k={k}]", cfg.samples, stabilizer, run.tol(1e-10))

        def frame_roundtrip(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k)
            back = FiberPoint.from_frame(sp, kappa.x, kappa.y, kappa.frame_basis())
            return _fiber_distance(kappa, back)

        run.check(f"frame-roundtrip[k={k}]", cfg.samples, frame_roundtrip, run.tol(1e-10))


# ---------------------------------------------------------------- holomorphy


def suite_holomorphy(run: SuiteRun) -> None:
    cfg = run.cfg
    l, m = cfg.l, cfg.m
    for k in cfg.ks:
        def draw(rng, k=k):
            kappa = sample_fiber_point(rng, l, m, k, over_base=True)
            charts = charts_of(kappa)
            a, b = charts[rng.integers(len(charts))]
            return kappa, a, b

        def antiholomorphic(rng, i, k=k):
            kappa, a, b = draw(rng)
            return antiholomorphic_residual(kappa, a, b, random_direction(kappa, rng, "01"))

        run.check(f"antiholomorphic-01[k={k}]", cfg.samples, antiholomorphic, run.tol(1e-6))

        def vertical(rng, i, k=k):
            kappa, a, b = draw(rng)
            c_h, d_h, c_v, d_v = random_direction(kappa, rng, "01")
            if d_v.size == 0:
                raise Skip
            d_v = d_v / np.linalg.norm(d_v)
            return antiholomorphic_residual(kappa, a, b, (0 * c_h, 0 * d_h, c_v, d_v))

        if 0 < k < l + m:
            run.check(f"vertical-01[k={k}]", cfg.samples, vertical, run.tol(1e-6))

        values, skipped = [], 0
        for i in range(cfg.samples):
            rng = run.rng(f"sanity-10[k={k}]", i)
            try:
                kappa, a, b = draw(rng)
                values.append(antiholomorphic_residual(kappa, a, b, random_direction(kappa, rng, "10")))
            except (SamplingError, Skip):
                skipped += 1
        frac = float(np.mean(np.array(values) > 1e-3)) if values else 0.0
        run.aggregate(f"sanity-10-fraction[k={k}]", frac, 0.95, "min", len(values), skipped)


# ---------------------------------------------------------------- injectivity


def suite_injectivity(run: SuiteRun) -> None:
    cfg, sp = run.cfg, run.cfg.space
    l, m = cfg.l, cfg.m
    sep_min = 1e-7
    for k in cfg.ks:
        def far(rng, i, k=k):
            k1 = sample_fiber_point(rng, l, m, k)
            charts = charts_of(k1)
            a, b = charts[rng.integers(len(charts))]

            def second(rng):
                k2 = sample_fiber_point(rng, l, m, k)
                if (a, b) not in charts_of(k2):
                    raise SamplingError("not in the chart")
                return k2

            k2 = retry(rng, second)
            if _fiber_distance(k1, k2) < sep_min:
                raise Skip
            return psi(k1, a, b).distance(psi(k2, a, b))

        run.check(f"far-pairs[k={k}]", cfg.samples, far, run.tol(1e-9), mode="min")

        def near(rng, i, k=k):
            k1 = sample_fiber_point(rng, l, m, k)
            charts = charts_of(k1)
            a, b = charts[rng.integers(len(charts))]
            eps = 10.0 ** rng.uniform(-6, -3)
            x2 = k1.x + eps * np.r_[0, complex_normal(rng, l)]
            y2 = k1.y + eps * complex_normal(rng, m + 1)
            basis = k1.L.basis + eps * complex_normal(rng, sp.ambient, k)
            k2 = FiberPoint.create(sp, x2, y2, frame_projection(sp, x2, y2) @ basis)
            if _fiber_distance(k1, k2) < sep_min or (a, b) not in charts_of(k2):
                raise Skip
            return psi(k1, a, b).distance(psi(k2, a, b))

        run.check(f"near-pairs[k={k}]", cfg.samples, near, run.tol(1e-9), mode="min")

        def jacobian(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k, over_base=True)
            charts = charts_of(kappa)
            a, b = charts[rng.integers(len(charts))]
            rank, expected = psi_jacobian_rank(kappa, a, b)
            return float(expected - rank), {"rank": rank, "expected": expected}

        run.check(f"jacobian-rank[k={k}]", min(cfg.samples, 20), jacobian, 0.0)


# ---------------------------------------------------------------- chart-cover


def suite_chart_cover(run: SuiteRun) -> None:
    cfg = run.cfg
    l, m = cfg.l, cfg.m
    for k in cfg.ks:
        def draw(rng, k=k):
            pv = pw = 0
            if rng.random() < 0.5:
                pv = int(rng.integers(0, min(l, k) + 1))
                pw = int(rng.integers(0, min(m, k - pv) + 1))
            return sample_fiber_point(rng, l, m, k, pure_v=pv, pure_w=pw)

        def cover(rng, i):
            kappa = draw(rng)
            disagree = 0
            inside = 0
            for a in range(kappa.k + 1):
                d = chart_membership_details(kappa, a, kappa.k - a)
                disagree += d["nonvanishing"] != d["lemma"]
                inside += d["nonvanishing"]
            return {f"criteria-agree[k={kappa.k}]": float(disagree),
                    f"covered[k={kappa.k}]": float(inside == 0)}

        run.group(f"draw[k={k}]", cfg.samples, cover,
                  {f"criteria-agree[k={k}]": (0.0, "max"), f"covered[k={k}]": (0.0, "max")})

# ---------------------------------------------------------------- fiber-solver


def _flag_residual(kappa: FiberPoint, quad: ModuliQuadruple) -> float:
    """Distance from the one-factor flag description of the solution."""
    sp = kappa.space
    b = kappa.L.basis
    if sp.l == 0:
        U, base, back, front = b[sp.w_slice], kappa.y, quad.nu, quad.mu
        form = np.ones(sp.dim_w)
    else:
        U, base, back, front = b[sp.v_slice], kappa.x, quad.zeta, quad.xi
        form = sp.form_diagonal()[sp.v_slice]
    res = 0.0
    if U.shape[1]:
        Uo = np.linalg.qr(U)[0]
        res = np.linalg.norm(Uo.conj().T @ (form * back)) / np.linalg.norm(back)
    span = np.linalg.qr(np.column_stack([base, U]))[0]
    front = front / np.linalg.norm(front)
    return float(max(res, np.linalg.norm(front - span @ (span.conj().T @ front))))


def suite_fiber_solver(run: SuiteRun) -> None:
    cfg, sp = run.cfg, run.cfg.space
    l, m = cfg.l, cfg.m
    for k in cfg.ks:
        def solve(rng, i, k=k):
            quad = sample_quadruple(rng, l, m)
            B = sample_plane(rng, sp, k)
            res = solve_fiber_detailed(quad, B)
            out = {f"psi-residual[k={k}]": res.residual,
                   f"member-positive[k={k}]": member_residual(res.kappa, quad)}
            g2 = stabilizer_element(_group_seed(rng), l, m) @ transport_to_base(quad.zeta, quad.nu)
            other = solve_fiber_detailed(quad, B, transport=g2)
            out[f"gauge-invariance[k={k}]"] = _fiber_distance(res.kappa, other.kappa)
            dual = solve_fiber_detailed(quad, B, method="dual")
            # the perpendicular route loses accuracy with its own balancing condition
            cond = max(r.balancing.condition for r in (res, dual) if r.balancing is not None) \
                if (res.balancing or dual.balancing) else 1.0
            out[f"duality[k={k}]"] = (_fiber_distance(res.kappa, dual.kappa) / max(1.0, cond * DUAL_COND_SCALE),
                                      {"condition": cond})
            if l == 0 or m == 0:
                out[f"flag-description[k={k}]"] = _flag_residual(res.kappa, quad)
            return out

        specs = {f"psi-residual[k={k}]": (run.tol(1e-8), "max"),
                 f"member-positive[k={k}]": (MEMBER_TOL, "max"),
                 f"gauge-invariance[k={k}]": (1e-8, "max"),
                 f"duality[k={k}]": (1e-8, "max")}
        if l == 0 or m == 0:
            specs[f"flag-description[k={k}]"] = (1e-10, "max")
        run.group(f"solve[k={k}]", cfg.samples, solve, specs)

        def real_slice(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k)
            quad = ModuliQuadruple.real(kappa.x, kappa.y)
            got = solve_fiber_detailed(quad, kappa.frame_basis()).kappa
            return _fiber_distance(kappa, got)

        run.check(f"real-slice-identity[k={k}]", cfg.samples, real_slice, 1e-12)

        def negative(rng, i, k=k):
            kappa = sample_fiber_point(rng, l, m, k)
            quad = sample_quadruple(rng, l, m)
            return member_residual(kappa, quad)

        run.check(f"member-negative[k={k}]", cfg.samples, negative, MEMBER_TOL, mode="min")


# ---------------------------------------------------------------- balancing


def _random_balancing(rng, d: int, cond_max: float = 100.0) -> BalancingProblem:
    def draw(rng):
        p = BalancingProblem(complex_normal(rng, d, d))
        if p.condition > cond_max:
            raise SamplingError("ill-conditioned draw")
        return p

    return retry(rng, draw)


def suite_balancing(run: SuiteRun) -> None:
    cfg = run.cfg

    def worked(rng, i):
        sol = balancing_solve(BalancingProblem(np.diag([2.0, 1.0])))
        return max(np.linalg.norm(sol.x - [1, 0]), np.linalg.norm(sol.y - [0.5, 0]), abs(sol.r0 - 0.25))

    run.check("worked-example-diag(2,1)", 1, worked, run.tol(1e-10))

    dims = [cfg.k + 1] if cfg.k is not None else list(range(1, cfg.l + cfg.m + 2))
    for d in dims:
        def identity(rng, i, d=d):
            sol = balancing_solve(BalancingProblem(np.eye(d)))
            e0 = np.eye(d)[0]
            return max(np.linalg.norm(sol.x - e0), np.linalg.norm(sol.y - e0), abs(sol.r0 - 1))

        run.check(f"identity[d={d}]", 1, identity, run.tol(1e-12))

        def post(rng, i, d=d):
            p = _random_balancing(rng, d)
            return max(balancing_residuals(p, balancing_solve(p)).values())

        run.check(f"postconditions[d={d}]", cfg.samples, post, run.tol(1e-9))

        agree = []

        def descent(rng, i, d=d):
            p = _random_balancing(rng, d)
            sol = balancing_solve(p)
            starts = balancing_descent(p.A, rng, starts=20)
            worst = max(projective_distance(v, sol.x) for v in starts)
            agree.append(worst <= 1e-8)
            return worst

        run.check(f"descent-oracle[d={d}]", cfg.samples, descent, run.tol(1e-8))
        rate = float(np.mean(agree)) if agree else 0.0
        run.aggregate(f"multistart-consistency[d={d}]", rate, 1.0, "min", len(agree))


# ---------------------------------------------------------------- intersection


_KINDS = ("front", "back", "generic")
_EXPECTED_TAG = {"front": IntersectionTag.G_K_N1, "back": IntersectionTag.G_K1_N1,
                 "generic": IntersectionTag.G_K1_N2}


def _perp(rng, w: np.ndarray, form: np.ndarray) -> np.ndarray:
    """Random vector v with (w, v)_form = 0."""
    basis = null_space((form * w)[None, :].conj())
    return basis @ complex_normal(rng, basis.shape[1])


def engineered_pair(rng, l: int, m: int, kind: str):
    """(q1, q2) with the cross-ratio equality holding by construction."""
    sp = SpacePair(l, m)
    q2 = sample_quadruple(rng, l, m)
    if kind == "front":
        return ModuliQuadruple.create(q2.xi, sample_ball(rng, l), q2.mu, sample_projective(rng, m)), q2
    if kind == "back":
        return ModuliQuadruple.create(sample_ball(rng, l), q2.zeta, sample_projective(rng, m), q2.nu), q2
    xi1, mu1 = sample_ball(rng, l), sample_projective(rng, m)
    G = sp.form_diagonal()[sp.v_slice]
    if m >= 1:
        zeta1 = sample_ball(rng, l)
        lhs = _gform(xi1, q2.zeta) * _gform(q2.xi, zeta1) / (_gform(xi1, zeta1) * _gform(q2.xi, q2.zeta))
        # (mu2, nu1) = c (mu1, nu1) makes the W ratio equal lhs
        c = lhs * _hform(q2.mu, q2.nu) / _hform(mu1, q2.nu)
        nu1 = _perp(rng, q2.mu - c * mu1, np.ones(m + 1))
        return ModuliQuadruple.create(xi1, zeta1, mu1, nu1), q2
    if l == 0:
        raise Skip
    nu1 = sample_projective(rng, m)
    rhs = _hform(mu1, q2.nu) * _hform(q2.mu, nu1) / (_hform(mu1, nu1) * _hform(q2.mu, q2.nu))
    c = rhs * _gform(q2.xi, q2.zeta) / _gform(xi1, q2.zeta)
    zeta1 = _perp(rng, q2.xi - c * xi1, G)
    if _gform(zeta1, zeta1).real <= 0:
        raise SamplingError("tuned zeta is not in the ball")
    zeta1 = zeta1 / zeta1[0]
    if np.linalg.norm(zeta1[1:]) > 0.95:
        raise SamplingError("tuned zeta too close to the boundary")
    return ModuliQuadruple.create(xi1, zeta1, mu1, nu1), q2


def suite_intersection(run: SuiteRun) -> None:
    cfg = run.cfg
    l, m = cfg.l, cfg.m
    n = l + m
    # for n = 1 the cross-ratio equality forces a shared front or back
    kinds = _KINDS if n >= 2 else _KINDS[:2]
    for k in cfg.ks:
        names = {c: f"{c}[k={k}]" for c in ("predicate", "classification", "witness-membership",
                                             "family-dimension", "empty-witness")}

        def pair(rng, i, k=k):
            if i % 2 == 0:
                kind = kinds[(i // 2) % len(kinds)]
                if n == 0:
                    raise Skip
                q1, q2 = retry(rng, lambda r: engineered_pair(r, l, m, kind))
                truth = True
            else:
                kind = None

                def draw(r):
                    q1, q2 = sample_quadruple(r, l, m), sample_quadruple(r, l, m)
                    lhs, rhs = cross_ratios(q1, q2)
                    if abs(lhs - rhs) <= 1e-6 * max(abs(lhs), abs(rhs)):
                        raise SamplingError("accidental coincidence")
                    return q1, q2

                if n == 0:
                    raise Skip
                q1, q2 = retry(rng, draw)
                truth = False
            out = {names["predicate"]: float(intersection_predicate(q1, q2) != truth)}
            if not truth:
                return out
            itype = intersection_type(q1, q2, k)
            out[names["classification"]] = (float(itype.tag != _EXPECTED_TAG[kind]),
                                            {"kind": kind, "tag": itype.tag.value})
            if itype.is_empty:
                try:
                    schubert_witness(q1, q2, k, seed=i)
                    out[names["empty-witness"]] = 1.0
                except NoIntersectionError:
                    out[names["empty-witness"]] = 0.0
                return out
            kappa = schubert_witness(q1, q2, k, seed=i)
            out[names["witness-membership"]] = max(member_residual(kappa, q1), member_residual(kappa, q2))
            dim = witness_family_dimension(q1, q2, k, seed=i)
            out[names["family-dimension"]] = (float(abs(dim - itype.dimension)),
                                              {"rank_test": dim, "classified": itype.dimension})
            return out

        run.group(f"pair[k={k}]", cfg.samples, pair, {
            names["predicate"]: (0.0, "max"),
            names["classification"]: (0.0, "max"),
            names["witness-membership"]: (MEMBER_TOL, "max"),
            names["family-dimension"]: (0.0, "max"),
            names["empty-witness"]: (0.0, "max"),
        })

        def identical(rng, i, k=k):
            q = sample_quadruple(rng, l, m)
            c = complex_normal(rng, 4)
            q1 = ModuliQuadruple.create(q.xi * c[0], q.zeta * c[1], q.mu * c[2], q.nu * c[3])
            return float(intersection_type(q1, q, k).tag != IntersectionTag.IDENTICAL)

        run.check(f"identical[k={k}]", min(cfg.samples, 100), identical, 0.0)

    def invariance(rng, i):
        q1, q2 = sample_quadruple(rng, l, m), sample_quadruple(rng, l, m)
        g = random_group_element(_group_seed(rng), l, m)
        c = complex_normal(rng, 8)
        raw = lambda q, s: ModuliQuadruple(q.xi * s[0], q.zeta * s[1], q.mu * s[2], q.nu * s[3])
        base = np.array(cross_ratios(q1, q2))
        moved = np.array(cross_ratios(raw(q1.act(g), c[:4]), raw(q2.act(g), c[4:])))
        return float(np.max(np.abs(moved - base)) / max(1.0, np.max(np.abs(base))))

    run.check("cross-ratio-invariance", cfg.samples, invariance, run.tol(1e-10))


# ---------------------------------------------------------------- flat


def suite_flat(run: SuiteRun) -> None:
    cfg = run.cfg
    n = max(cfg.l + cfg.m, 1)
    ks = range(n + 1) if cfg.k is None else [min(cfg.k, n)]
    for k in ks:
        def plane(rng, k=k):
            return Subspace(complex_normal(rng, n, k)) if k else Subspace(np.zeros((n, 0), complex))

        def roundtrip(rng, i, k=k):
            L, v = plane(rng), complex_normal(rng, n)
            w = flat_eval(FlatSection.real(v), L)
            out = {f"round-trip[k={k}]": np.linalg.norm(flat_project(w) - v) / np.linalg.norm(v),
                   f"uniqueness-rank[k={k}]": float(n - uniqueness_rank(L)),
                   f"projection-oracle[k={k}]": np.linalg.norm(w.u - projection_oracle(L.basis, v))
                   / np.linalg.norm(v)}
            f = FlatSection.create(complex_normal(rng, n), v)
            v2 = flat_project(flat_eval(f, L))
            out[f"non-real-detected[k={k}]"] = max(np.linalg.norm(v2 - f.alpha), np.linalg.norm(v2 - f.v))
            U = sample_unitary(rng, n)
            lhs = flat_eval(f.act(U), Subspace(U @ L.basis))
            rhs = flat_eval(f, L).act(U)
            out[f"equivariance[k={k}]"] = max(np.linalg.norm(lhs.beta - rhs.beta),
                                              np.linalg.norm(lhs.u - rhs.u)) / np.linalg.norm(v)
            return out

        run.group(f"draw[k={k}]", cfg.samples, roundtrip, {
            f"round-trip[k={k}]": (run.tol(1e-12), "max"),
            f"uniqueness-rank[k={k}]": (0.0, "max"),
            f"projection-oracle[k={k}]": (1e-12, "max"),
            f"non-real-detected[k={k}]": (1e-6, "min"),
            f"equivariance[k={k}]": (1e-12, "max"),
        })


# ---------------------------------------------------------------- flag-models


def suite_flag_models(run: SuiteRun) -> None:
    cfg = run.cfg
    models = []
    if cfg.m >= 1:
        models.append(("P", SpacePair(0, cfg.m)))
    if cfg.l >= 1:
        models.append(("H", SpacePair(cfg.l, 0)))
    for name, sp in models:
        ks = range(sp.n + 1) if cfg.k is None else [cfg.k] if cfg.k <= sp.n else []
        for k in ks:
            def roundtrip(rng, i, k=k, sp=sp):
                kappa = sample_fiber_point(rng, sp.l, sp.m, k)
                U, Up = flag_correspondence(kappa)
                nested = np.linalg.matrix_rank(np.hstack([Up.basis, U.basis])) - Up.dim
                back = flag_to_fiber(sp, U.basis, Up.basis)
                return max(_fiber_distance(kappa, back), float(nested),
                           float(U.dim != k), float(Up.dim != k + 1))

            run.check(f"{name}-roundtrip[k={k}]", cfg.samples, roundtrip, 1e-10)

            def solver(rng, i, k=k, sp=sp):
                quad = sample_quadruple(rng, sp.l, sp.m)
                kappa = solve_fiber_detailed(quad, sample_plane(rng, sp, k)).kappa
                return _flag_residual(kappa, quad)

            run.check(f"{name}-solver-flag[k={k}]", cfg.samples, solver, run.tol(1e-10))

            if name == "H" and k >= 1:
                def sign(rng, i, k=k, sp=sp):
                    U = complex_normal(rng, sp.dim_v, k)
                    U[:, 0] = 0
                    U[0, 0] = 1  # a positive vector inside U
                    Up = np.hstack([U, complex_normal(rng, sp.dim_v, 1)])
                    try:
                        flag_to_fiber(sp, U, Up)
                    except ModelError:
                        return 0.0
                    return 1.0

                run.check(f"H-sign-condition[k={k}]", min(cfg.samples, 100), sign, 0.0)


# ---------------------------------------------------------------- rank-stratum


def suite_rank_stratum(run: SuiteRun) -> None:
    cfg = run.cfg
    l, m = cfg.l, cfg.m
    if l < 1 or m < 1:
        raise ConfigError("rank-stratum needs l, m >= 1")
    if cfg.k not in (None, 1):
        raise ConfigError("rank-stratum is defined for k = 1")

    def stratum(rng, i):
        pick = i % 3
        kappa = sample_fiber_point(rng, l, m, 1, pure_v=int(pick == 1), pure_w=int(pick == 2))
        both = len(charts_of(kappa)) == 2
        rank = rank_stratum(kappa)
        out = {"rank-bound": float(max(0, rank - 2))}
        if both:
            out["rank-in-both-charts"] = (float(rank != 2), {"rank": rank})
        else:
            out["rank-off-intersection"] = (float(rank > 1), {"rank": rank})
        return out

    run.group("kappa", cfg.samples, stratum, {"rank-in-both-charts": (0.0, "max"),
                                              "rank-off-intersection": (0.0, "max"),
                                              "rank-bound": (0.0, "max")})


SUITES = {
    "plucker": suite_plucker,
    "index-confluence": suite_index_confluence,
    "base-identities": suite_base_identities,
    "frame-consistency": suite_frame_consistency,
    "holomorphy": suite_holomorphy,
    "injectivity": suite_injectivity,
    "chart-cover": suite_chart_cover,
    "fiber-solver": suite_fiber_solver,
    "balancing": suite_balancing,
    "intersection": suite_intersection,
    "flat": suite_flat,
    "flag-models": suite_flag_models,
    "rank-stratum": suite_rank_stratum,
}
EXACT_SUITES = frozenset({"plucker", "base-identities", "index-confluence"})

__all__ = ["SCHEMA", "SUITES", "EXACT_SUITES", "ConfigError", "SuiteConfig", "CheckRecord",
           "Report", "run_suite", "engineered_pair"]
