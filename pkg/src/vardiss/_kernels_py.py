"""NumPy/SciPy reference versions of the compiled kernels."""

import numpy as np
from scipy.linalg import solve_banded


def cyclic_tridiag_solve(a, b, c, d):
    """Solve a periodic tridiagonal system via Sherman-Morrison.

    Row ``i`` reads ``a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i]`` with
    indices taken modulo ``n``.
    """
    a, b, c, d = (np.asarray(v) for v in (a, b, c, d))
    n = b.shape[0]
    dtype = np.result_type(a, b, c, d)
    gamma = -b[0] if b[0] != 0 else -1.0
    bb = b.astype(dtype, copy=True)
    bb[0] -= gamma
    bb[-1] -= a[0] * c[-1] / gamma
    ab = np.zeros((3, n), dtype=dtype)
    ab[0, 1:] = c[:-1]
    ab[1] = bb
    ab[2, :-1] = a[1:]
    u = np.zeros(n, dtype=dtype)
    u[0] = gamma
    u[-1] = c[-1]
    yz = solve_banded((1, 1), ab, np.stack([d.astype(dtype), u], axis=1),
                      check_finite=False)
    y, z = yz[:, 0], yz[:, 1]
    vy = y[0] + a[0] * y[-1] / gamma
    vz = z[0] + a[0] * z[-1] / gamma
    return y - (vy / (1.0 + vz)) * z


def assemble_fourier_matrix(s, c1, c2, diag):
    """Dense ``H[i, j] = s[i] s[j] c1[i-j] + c2[i-j] + delta_ij diag[i]``."""
    n = s.shape[0]
    idx = np.subtract.outer(np.arange(n), np.arange(n)) % n
    H = np.outer(s, s) * c1[idx] + c2[idx]
    H[np.diag_indices(n)] += diag
    return H
