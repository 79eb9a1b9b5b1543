"""Kernel dispatch: compiled extension when built, NumPy fallback otherwise.

Set ``VARDISS_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_ext = None
if not os.environ.get("VARDISS_PURE_PYTHON"):
    try:
        from . import _kernels as _ext
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _ext = None


def cyclic_tridiag_solve(a, b, c, d, backend=None):
    """Periodic tridiagonal solve; see ``_kernels_py.cyclic_tridiag_solve``."""
    backend = backend or BACKEND
    if len(b) < 3:
        raise ValueError("cyclic tridiagonal system needs n >= 3")
    if backend == "compiled" and _ext is not None:
        dtype = np.result_type(a, b, c, d, np.float64)
        args = [np.ascontiguousarray(v, dtype=dtype) for v in (a, b, c, d)]
        return _ext.cyclic_tridiag_solve(*args)
    return _kernels_py.cyclic_tridiag_solve(a, b, c, d)


def assemble_fourier_matrix(s, c1, c2, diag, backend=None):
    """Dense Hermitian assembly; see ``_kernels_py.assemble_fourier_matrix``."""
    backend = backend or BACKEND
    if backend == "compiled" and _ext is not None:
        return _ext.assemble_fourier_matrix(
            np.ascontiguousarray(s, dtype=np.float64),
            np.ascontiguousarray(c1, dtype=np.complex128),
            np.ascontiguousarray(c2, dtype=np.complex128),
            np.ascontiguousarray(diag, dtype=np.float64),
        )
    return _kernels_py.assemble_fourier_matrix(
        np.asarray(s, dtype=np.float64), np.asarray(c1, dtype=np.complex128),
        np.asarray(c2, dtype=np.complex128), np.asarray(diag, dtype=np.float64))
