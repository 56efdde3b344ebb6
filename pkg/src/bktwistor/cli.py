"""Command-line interface: ``bktwistor verify|solve-fiber|intersect|demo``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .complexification import (
    MEMBER_TOL,
    BalancingProblem,
    IntersectionTag,
    ModuliQuadruple,
    balancing_solve,
    cross_ratios,
    intersection_predicate,
    intersection_type,
    member_residual,
    schubert_witness,
    solve_fiber_detailed,
    witness_family_dimension,
)
from .errors import TwistorError
from .exterior import GradedTensor
from .harness import SCHEMA, SUITES, ConfigError, SuiteConfig, run_suite
from .linalg import SpacePair

SOLVE_TOL = 1e-8


def _pair(c) -> list:
    return [float(np.real(c)), float(np.imag(c))]


def _vec(items) -> np.ndarray:
    return np.array([complex(a, b) for a, b in items], dtype=complex)


def _write(path, obj) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _read(path):
    with open(path) as fh:
        return json.load(fh)


def read_plane(obj, space: SpacePair):
    """Plane from JSON: {"basis": columns} or {"z": tensor entries, "k": degree}.

    Basis columns have length n (coordinate directions, V part first) or
    l + m + 2 (ambient, with zero affine entries).  A bare list is read as
    tensor entries.
    """
    if isinstance(obj, list):
        obj = {"z": obj}
    if "basis" in obj:
        cols = [_vec(c) for c in obj["basis"]]
        out = np.zeros((space.ambient, len(cols)), complex)
        for i, c in enumerate(cols):
            if len(c) == space.n:
                out[space.tangent_positions, i] = c
            elif len(c) == space.ambient:
                out[:, i] = c
            else:
                raise ValueError(f"basis vector of length {len(c)}; expected {space.n} or {space.ambient}")
        return out
    items = obj["z"]
    k = obj.get("k")
    if k is None:
        k = len(items[0]["I"]) + len(items[0]["J"]) if items else 0
    return GradedTensor.from_json(space, k, items)


def cmd_verify(args) -> int:
    cfg = SuiteConfig(args.suite, l=args.l, m=args.m, k=args.k, samples=args.samples, seed=args.seed,
                      tol=args.tol, backend=args.backend, out=args.out)
    try:
        report = run_suite(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write(args.out, report.to_json())
    print(f"{cfg.suite}: {report.verdict} ({report.failures} failures, {report.wall_time:.2f}s)",
          file=sys.stderr)
    return 0 if report.verdict == "pass" else 1


def cmd_solve_fiber(args) -> int:
    quad = ModuliQuadruple.from_json(_read(args.input))
    plane = read_plane(_read(args.plane), quad.space)
    try:
        res = solve_fiber_detailed(quad, plane)
    except TwistorError as exc:
        _write(args.out, {"schema": SCHEMA, "verdict": "fail", "error": f"{type(exc).__name__}: {exc}"})
        return 1
    out = {"schema": SCHEMA, **res.to_json()}
    out["verdict"] = "pass" if res.residual <= SOLVE_TOL else "fail"
    _write(args.out, out)
    return 0 if out["verdict"] == "pass" else 1


def intersect_pair(q1: ModuliQuadruple, q2: ModuliQuadruple, k: int, seed: int = 0) -> dict:
    lhs, rhs = cross_ratios(q1, q2)
    itype = intersection_type(q1, q2, k)
    out = {"schema": SCHEMA, "k": k, "predicate": intersection_predicate(q1, q2),
           "cross_ratios": [_pair(lhs), _pair(rhs)], "type": itype.to_json(),
           "witness": None, "member_residuals": None, "family_dimension": None}
    ok = True
    if not itype.is_empty and itype.tag != IntersectionTag.IDENTICAL:
        kappa = schubert_witness(q1, q2, k, seed=seed)
        res = [member_residual(kappa, q1), member_residual(kappa, q2)]
        dim = witness_family_dimension(q1, q2, k, seed=seed)
        out["witness"] = kappa.to_json()
        out["member_residuals"] = res
        out["family_dimension"] = dim
        ok = max(res) <= MEMBER_TOL and dim == itype.dimension
    out["verdict"] = "pass" if ok else "fail"
    return out


def cmd_intersect(args) -> int:
    obj = _read(args.input)
    q1, q2 = ModuliQuadruple.from_json(obj["q1"]), ModuliQuadruple.from_json(obj["q2"])
    k = int(obj.get("k", 1))
    try:
        out = intersect_pair(q1, q2, k, seed=int(obj.get("seed", 0)))
    except TwistorError as exc:
        out = {"schema": SCHEMA, "verdict": "fail", "error": f"{type(exc).__name__}: {exc}"}
    _write(args.out, out)
    return 0 if out["verdict"] == "pass" else 1


def _fmt(v) -> str:
    return "(" + ", ".join(f"{c.real:.6g}" if abs(c.imag) < 1e-14 else f"{c:.6g}" for c in np.asarray(v)) + ")"


def cmd_demo(args) -> int:
    sol = balancing_solve(BalancingProblem(np.diag([2.0, 1.0])))
    print("Balancing, A = diag(2, 1), G = diag(1, -1)")
    print(f"  x  = {_fmt(sol.x)}")
    print(f"  y  = {_fmt(sol.y)}")
    print(f"  r0 = {sol.r0:.12g}")
    print()
    sp = SpacePair(1, 1)
    t = 0.5
    x0, y0 = sp.base_x(), sp.base_y()
    q1 = ModuliQuadruple.create(x0, x0, y0, y0)
    q2 = ModuliQuadruple.create(x0, x0, np.array([1.0, t]), y0)
    out = intersect_pair(q1, q2, k=1)
    lhs, rhs = out["cross_ratios"]
    print(f"Intersection, l = m = 1, k = 1, q1 = (x0, x0, y0, y0), q2 = (x0, x0, (1, {t}), y0)")
    print(f"  cross-ratios: {complex(*lhs):.6g} and {complex(*rhs):.6g}; predicate {out['predicate']}")
    typ = out["type"]
    print(f"  type {typ['tag']} = G{tuple(typ['grassmannian'])}, dimension {typ['dimension']}")
    w = out["witness"]
    print(f"  witness x = {_fmt(_vec(w['x']))}, y = {_fmt(_vec(w['y']))}")
    print(f"          L = {_fmt(_vec(w['L'][0]))}")
    r1, r2 = out["member_residuals"]
    print(f"  member residuals: {r1:.3e} (q1), {r2:.3e} (q2)")
    return 0 if out["verdict"] == "pass" else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bktwistor", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--l", type=int, default=1)
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--k", type=int, default=None, help="omit to sweep every k")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=None, help="override the primary tolerance")
    v.add_argument("--backend", choices=("float", "exact"), default="float")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve-fiber", help="fiber point for a quadruple and a plane")
    s.add_argument("--input", required=True)
    s.add_argument("--plane", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_solve_fiber)

    i = sub.add_parser("intersect", help="intersection type and witness for a pair of quadruples")
    i.add_argument("--input", required=True)
    i.add_argument("--out", default="-")
    i.set_defaults(func=cmd_intersect)

    d = sub.add_parser("demo", help="print the worked examples")
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
