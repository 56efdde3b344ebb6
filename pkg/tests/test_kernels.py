import os
import subprocess
import sys

import numpy as np
import pytest

from bktwistor import _pykernels, kernels
from bktwistor.exterior import combo_masks, mask_index, plucker_of_subspace
from bktwistor.linalg import SpacePair

from conftest import cnormal


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_fallback_selected_by_environment():
    env = dict(os.environ, BKTWISTOR_PURE_PYTHON="1")
    code = ("import bktwistor; from bktwistor import kernels; "
            "print(kernels.BACKEND, bktwistor.KERNEL_BACKEND); "
            "from bktwistor.indices import normalize_keys; print(normalize_keys([3, 1, 3]))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    lines = out.stdout.split("\n")
    assert lines[0] == "python python"
    assert lines[1] == "(1, (1,))"


def _case(rng, n, k):
    t = plucker_of_subspace(cnormal(rng, n, k), SpacePair(n - 2, 0))
    return (np.ascontiguousarray(t.coeffs), mask_index(n), combo_masks(n, k - 1), combo_masks(n, k + 1), n)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled extension not built")
def test_compiled_matches_python(rng):
    from bktwistor import _ckernels
    for _ in range(200):
        w = rng.integers(0, 6, size=int(rng.integers(0, 14))).tolist()
        assert _ckernels.normalize_positions(w) == _pykernels.normalize_positions(w)
    for n, k in [(3, 1), (4, 2), (6, 3), (7, 2)]:
        case = _case(rng, n, k)
        a, b = _ckernels.plucker_max_residual(*case), _pykernels.plucker_max_residual(*case)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
