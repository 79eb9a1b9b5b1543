import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vardiss import kernels
from vardiss._kernels_py import assemble_fourier_matrix as assemble_ref

BACKENDS = ["python"] + (["compiled"] if kernels._ext is not None else [])


def dense_cyclic(a, b, c):
    n = len(b)
    A = np.diag(b).astype(np.result_type(a, b, c))
    for i in range(n):
        A[i, (i - 1) % n] += a[i]
        A[i, (i + 1) % n] += c[i]
    return A


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=30, deadline=None)
@given(st.integers(3, 40), st.integers(0, 2 ** 32 - 1), st.booleans())
def test_cyclic_tridiag_matches_dense(backend, n, seed, complex_):
    r = np.random.default_rng(seed)
    a, c = r.normal(size=n), r.normal(size=n)
    b = 4.0 + np.abs(r.normal(size=n))
    d = r.normal(size=n)
    if complex_:
        a = a + 1j * r.normal(size=n)
        d = d + 1j * r.normal(size=n)
    x = kernels.cyclic_tridiag_solve(a, b, c, d, backend=backend)
    assert np.allclose(dense_cyclic(a, b, c) @ x, d, atol=1e-11)


@pytest.mark.parametrize("backend", BACKENDS)
def test_assembly_matches_reference(backend, rng):
    n = 16
    s = rng.normal(size=n)
    c1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    c2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    diag = rng.normal(size=n)
    H = kernels.assemble_fourier_matrix(s, c1, c2, diag, backend=backend)
    i, j = 3, 11
    assert np.isclose(H[i, j], s[i] * s[j] * c1[(i - j) % n] + c2[(i - j) % n])
    assert np.allclose(H, assemble_ref(s, c1, c2, diag))


def test_rejects_tiny_system():
    with pytest.raises(ValueError):
        kernels.cyclic_tridiag_solve(np.ones(2), np.ones(2), np.ones(2), np.ones(2))
