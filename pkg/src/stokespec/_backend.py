"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``STOKESPEC_PURE_PYTHON=1`` to force the numpy kernels. Inputs that are
not float64 always take the numpy path.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("STOKESPEC_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"


def _compiled_ok(arr):
    return _ckernels is not None and np.asarray(arr).dtype == np.float64


def jhalf_range(nlo, nhi, x):
    if _compiled_ok(x):
        return _ckernels.jhalf_range(nlo, nhi, x)
    return _pykernels.jhalf_range(nlo, nhi, x)


def legendre_table(lmax, t):
    if _compiled_ok(t):
        return _ckernels.legendre_table(lmax, t)
    return _pykernels.legendre_table(lmax, t)
