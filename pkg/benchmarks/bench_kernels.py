"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times both implementations on the same inputs and checks they agree.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from bktwistor import _pykernels
from bktwistor.exterior import combo_masks, mask_index, plucker_of_subspace
from bktwistor.linalg import SpacePair

try:
    from bktwistor import _ckernels
except ImportError:
    _ckernels = None


def word_cases(rng, count=2000, length=12, letters=8):
    return [rng.integers(0, letters, size=length).tolist() for _ in range(count)]


def plucker_case(rng, n, k):
    sp = SpacePair(n - 2, 0)
    B = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    t = plucker_of_subspace(B, sp)
    return (np.ascontiguousarray(t.coeffs), mask_index(n), combo_masks(n, k - 1), combo_masks(n, k + 1), n)


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; install with a C compiler and Cython", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    rows = []

    words = word_cases(rng)
    assert all(_ckernels.normalize_positions(w) == _pykernels.normalize_positions(w) for w in words)
    t_py = bench(lambda: [_pykernels.normalize_positions(w) for w in words], args.repeat)
    t_c = bench(lambda: [_ckernels.normalize_positions(w) for w in words], args.repeat)
    rows.append({"kernel": "normalize_positions", "case": f"{len(words)} words of length 12",
                 "python_s": t_py, "cython_s": t_c})

    for n, k in [(6, 3), (8, 4), (10, 5)]:
        case = plucker_case(rng, n, k)
        r_py = _pykernels.plucker_max_residual(*case)
        r_c = _ckernels.plucker_max_residual(*case)
        assert abs(r_py - r_c) <= 1e-12 * max(1.0, abs(r_py))
        t_py = bench(lambda: _pykernels.plucker_max_residual(*case), args.repeat)
        t_c = bench(lambda: _ckernels.plucker_max_residual(*case), args.repeat)
        rows.append({"kernel": "plucker_max_residual", "case": f"n={n}, k={k}",
                     "python_s": t_py, "cython_s": t_c})

    print(f"{'kernel':22s} {'case':26s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for r in rows:
        r["speedup"] = r["python_s"] / r["cython_s"]
        print(f"{r['kernel']:22s} {r['case']:26s} {r['python_s'] * 1e3:9.2f}ms {r['cython_s'] * 1e3:9.2f}ms "
              f"{r['speedup']:7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
