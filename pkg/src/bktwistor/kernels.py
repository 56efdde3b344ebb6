"""Kernel selection: compiled extension when importable, Python otherwise.

Set ``BKTWISTOR_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("BKTWISTOR_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

normalize_positions = _impl.normalize_positions
plucker_max_residual = _impl.plucker_max_residual

__all__ = ["BACKEND", "normalize_positions", "plucker_max_residual"]
