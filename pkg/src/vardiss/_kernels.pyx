# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. See ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp

ctypedef fused scalar_t:
    double
    double complex


cdef void _thomas(scalar_t[::1] a, scalar_t[::1] b, scalar_t[::1] c,
                  scalar_t[::1] d, scalar_t[::1] cp, scalar_t[::1] x) noexcept nogil:
    # a[i]: coupling of row i to x[i-1]; c[i]: coupling of row i to x[i+1]
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i
    cdef scalar_t denom
    cp[0] = c[0] / b[0]
    x[0] = d[0] / b[0]
    for i in range(1, n):
        denom = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / denom
        x[i] = (d[i] - a[i] * x[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - cp[i] * x[i + 1]


def cyclic_tridiag_solve(scalar_t[::1] a, scalar_t[::1] b, scalar_t[::1] c,
                         scalar_t[::1] d):
    """Solve a periodic tridiagonal system.

    Row ``i`` reads ``a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i]`` with
    indices taken modulo ``n``.
    """
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i
    if scalar_t is double:
        dtype = np.float64
    else:
        dtype = np.complex128
    bb_arr = np.array(b, dtype=dtype)
    u_arr = np.zeros(n, dtype=dtype)
    cp_arr = np.empty(n, dtype=dtype)
    y_arr = np.empty(n, dtype=dtype)
    z_arr = np.empty(n, dtype=dtype)
    cdef scalar_t[::1] bb = bb_arr
    cdef scalar_t[::1] u = u_arr
    cdef scalar_t[::1] cp = cp_arr
    cdef scalar_t[::1] y = y_arr
    cdef scalar_t[::1] z = z_arr
    cdef scalar_t gamma = -b[0]
    cdef scalar_t vy, vz, fact
    with nogil:
        if gamma == 0:
            gamma = -1.0
        bb[0] = b[0] - gamma
        bb[n - 1] = b[n - 1] - a[0] * c[n - 1] / gamma
        u[0] = gamma
        u[n - 1] = c[n - 1]
        _thomas(a, bb, c, d, cp, y)
        _thomas(a, bb, c, u, cp, z)
        vy = y[0] + a[0] * y[n - 1] / gamma
        vz = z[0] + a[0] * z[n - 1] / gamma
        fact = vy / (1.0 + vz)
        for i in range(n):
            y[i] = y[i] - fact * z[i]
    return y_arr


def assemble_fourier_matrix(double[::1] s, double complex[::1] c1,
                            double complex[::1] c2, double[::1] diag):
    """Dense ``H[i, j] = s[i] s[j] c1[i-j] + c2[i-j] + delta_ij diag[i]``.

    ``c1`` and ``c2`` are circulant generators (indices modulo ``n``).
    """
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t i, j, r
    out = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] H = out
    with nogil:
        for i in range(n):
            for j in range(n):
                r = i - j
                if r < 0:
                    r = r + n
                H[i, j] = s[i] * s[j] * c1[r] + c2[r]
            H[i, i] = H[i, i] + diag[i]
    return out
