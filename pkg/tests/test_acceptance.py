"""Acceptance criteria, one test and one PASS/FAIL line each.

Sample sizes are the stated ones.  Criteria quantified over many (l, m, k)
configurations run a representative set by default; set
BKTWISTOR_ACCEPTANCE=full to sweep every configuration with l, m <= 3.
"""
import json
import math
import os

import pytest

from bktwistor.cli import main as cli_main
from bktwistor.harness import SuiteConfig, run_suite

FULL = os.environ.get("BKTWISTOR_ACCEPTANCE") == "full"
LM = [(l, m) for l in range(4) for m in range(4) if l + m]
LMK = [(l, m, k) for l, m in LM for k in range(l + m + 1)]


def pick(default, full):
    return full if FULL else default


def run(configs):
    return [run_suite(SuiteConfig(**c)) for c in configs]


def worst(reports, prefix):
    """Worst value over checks whose name starts with ``prefix``."""
    vals, mode = [], "max"
    for r in reports:
        for c in r.checks:
            if c.name.startswith(prefix) and c.worst is not None:
                vals.append(c.worst)
                mode = c.mode
    if not vals:
        return None
    bad = [v for v in vals if not math.isfinite(v)]
    return bad[0] if bad else (max(vals) if mode == "max" else min(vals))


def report_line(capsys, number, title, reports, stats=(), extra_ok=True, note=""):
    failures = sum(r.failures for r in reports)
    samples = sum(sum(c.samples for c in r.checks) for r in reports)
    ok = failures == 0 and extra_ok and bool(reports)
    parts = [f"{len(reports)} runs", f"{samples} samples", f"{failures} failures"]
    for label, prefix in stats:
        w = worst(reports, prefix)
        parts.append(f"{label} {w:.2e}" if isinstance(w, float) else f"{label} {w}")
    if note:
        parts.append(note)
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: " + ", ".join(parts)
    with capsys.disabled():
        print("\n" + line)
    failing = [(r.config.suite, r.config.l, r.config.m, r.config.k, c.name, c.failures[:3])
               for r in reports for c in r.checks if c.failure_count]
    assert ok, json.dumps(failing, default=str)[:3000]


def test_01_index_calculus(capsys):
    reports = run([dict(suite="index-confluence", l=3, m=3, samples=100_000, seed=0)])
    report_line(capsys, 1, "index calculus confluence and oracle agreement", reports,
                stats=[("mismatches", "exhaustive"), ("random mismatches", "random-long")])


def test_02_plucker(capsys):
    reports = run([dict(suite="plucker", l=3, m=3, samples=1000, seed=0),
                   dict(suite="plucker", l=2, m=2, samples=100, seed=0, backend="exact")])
    report_line(capsys, 2, "Plücker relations, n <= 8, exact G(2,4)", reports,
                stats=[("worst residual", "residual"), ("exact nonzero", "exact-relations")])


def test_03_base_identities(capsys):
    configs = [dict(suite="base-identities", l=l, m=m, samples=20, seed=0, backend="exact") for l, m in LM]
    configs += [dict(suite="base-identities", l=l, m=m, samples=100, seed=0) for l, m in LM]
    reports = run(configs)
    exact_worst = worst([r for r in reports if r.config.backend == "exact"], "base")
    report_line(capsys, 3, "base-point identities, l, m <= 3, all k", reports,
                stats=[("worst", "base")], extra_ok=exact_worst == 0.0,
                note=f"exact worst {exact_worst}")


def test_04_holomorphy(capsys):
    reports = run([dict(suite="holomorphy", l=l, m=m, samples=100, seed=0) for l, m in LM])
    report_line(capsys, 4, "holomorphy, l, m <= 3, all k", reports,
                stats=[("worst dbar", "antiholomorphic"), ("(1,0) fraction", "sanity")])


def test_05_embedding(capsys):
    configs = pick([(2, 2, 2), (1, 1, 1)], LMK)
    reports = run([dict(suite="injectivity", l=l, m=m, k=k, samples=10_000, seed=0) for l, m, k in configs])
    report_line(capsys, 5, "embedding: separation and Jacobian rank", reports,
                stats=[("min far", "far"), ("min near", "near"), ("rank deficit", "jacobian")])


def test_06_chart_cover(capsys):
    configs = pick([(3, 3, 3), (2, 1, 1), (0, 3, 2), (1, 2, 3)], LMK)
    reports = run([dict(suite="chart-cover", l=l, m=m, k=k, samples=10_000, seed=0) for l, m, k in configs])
    report_line(capsys, 6, "chart covering", reports)


def test_07_fiber_solver(capsys):
    configs = pick([(3, 3, 3), (2, 2, 2), (2, 3, 3), (0, 3, 2), (3, 0, 2), (1, 2, 1)], LMK)
    reports = run([dict(suite="fiber-solver", l=l, m=m, k=k, samples=1000, seed=0) for l, m, k in configs])
    report_line(capsys, 7, "fiber solver", reports,
                stats=[("worst psi", "psi-residual"), ("real slice", "real-slice"),
                       ("flag", "flag-description")])


def test_08_balancing(capsys):
    reports = run([dict(suite="balancing", l=2, m=2, samples=1000, seed=0)])
    report_line(capsys, 8, "balancing, d <= 5", reports,
                stats=[("worked example", "worked"), ("descent", "descent"),
                       ("multistart rate", "multistart")])


def test_09_intersection(capsys):
    configs = pick([(1, 1, 1), (2, 1, 2), (3, 3, 3), (0, 3, 2), (3, 0, 1)],
                   [c for c in LMK if 0 < c[2]])
    reports = run([dict(suite="intersection", l=l, m=m, k=k, samples=1000, seed=0) for l, m, k in configs])
    report_line(capsys, 9, "intersection theorem", reports,
                stats=[("predicate errors", "predicate"), ("witness", "witness-membership")])


def test_10_flat(capsys):
    ns = pick([3, 6], [1, 2, 3, 4, 5, 6])
    reports = run([dict(suite="flat", l=0, m=n, samples=10_000, seed=0) for n in ns])
    report_line(capsys, 10, "flat model round trip", reports, stats=[("worst", "round-trip")])


def test_11_rank_stratum(capsys):
    configs = pick([(1, 1), (3, 3)], [(l, m) for l, m in LM if l and m])
    reports = run([dict(suite="rank-stratum", l=l, m=m, k=1, samples=10_000, seed=0) for l, m in configs])
    report_line(capsys, 11, "rank stratification", reports)


DETERMINISM = [
    ["--suite", "fiber-solver", "--l", "2", "--m", "1", "--k", "2", "--samples", "50"],
    ["--suite", "intersection", "--l", "2", "--m", "2", "--k", "2", "--samples", "50"],
    ["--suite", "holomorphy", "--l", "1", "--m", "2", "--k", "1", "--samples", "10"],
    ["--suite", "plucker", "--l", "1", "--m", "1", "--samples", "50", "--backend", "exact"],
    ["--suite", "flat", "--l", "2", "--m", "2", "--samples", "200"],
]


def test_12_determinism(capsys, tmp_path):
    mismatched = []
    for i, args in enumerate(DETERMINISM):
        bodies = []
        for rep in range(2):
            out = tmp_path / f"r{i}_{rep}.json"
            cli_main(["verify", *args, "--seed", "7", "--out", str(out)])
            body = json.loads(out.read_text())
            body.pop("wall_time")
            bodies.append(json.dumps(body, sort_keys=True))
        if bodies[0] != bodies[1]:
            mismatched.append(args[1])
    ok = not mismatched
    line = (f"{'PASS' if ok else 'FAIL'} [12] determinism: {len(DETERMINISM)} suites run twice, "
            f"{len(mismatched)} differing bodies")
    with capsys.disabled():
        print("\n" + line)
    assert ok, mismatched


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
