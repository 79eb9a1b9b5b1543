import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vardiss.grid import ZGrid
from vardiss.oracle import CouetteParams, couette_exact, couette_field, decay_exponent


def test_identity_at_zero():
    assert couette_exact(CouetteParams(1e-3, 1, 2.0), 0.0, 1.5 + 2j) == 1.5 + 2j


def test_reference_value():
    f = couette_exact(CouetteParams(1e-3, 1, 0.0), 10.0, 1.0)
    assert math.isclose(f, math.exp(-0.34333333333333333), rel_tol=1e-14)
    assert math.isclose(f, math.exp(-1e-3 * (10 + 1000 / 3)), rel_tol=1e-14)


def test_cubic_growth_of_exponent():
    mu, t = 1e-4, 50.0
    e1, e2 = decay_exponent(mu, 1, 0.0, t), decay_exponent(mu, 1, 0.0, 2 * t)
    # k^2 t + t^3 / 3 doubled in t
    assert math.isclose(e2, mu * (2 * t + 8 * t ** 3 / 3), rel_tol=1e-14)
    assert e2 / e1 > 7


def test_invalid():
    with pytest.raises(ValueError):
        CouetteParams(1e-3, 0)
    with pytest.raises(ValueError):
        CouetteParams(-1.0, 1)
    with pytest.raises(ValueError):
        couette_exact(CouetteParams(1e-3, 1), -1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e-1), st.sampled_from([-2, -1, 1, 3]), st.floats(-10, 10),
       st.floats(0, 50))
def test_monotone_decay(mu, k, xi, t):
    p = CouetteParams(mu, k, xi)
    a, b = abs(couette_exact(p, t, 1.0)), abs(couette_exact(p, t + 0.5, 1.0))
    assert a <= 1.0 and b < a or (a == 0 and b == 0)


def test_field_matches_pointwise():
    g = ZGrid(10.0, 64)
    W0 = g.plane_wave(5)
    out = couette_field(1e-2, 2, g, 3.0, W0)
    expected = couette_exact(CouetteParams(1e-2, 2, g.xi[5]), 3.0, 1.0) * W0
    assert np.allclose(out, expected, atol=1e-14)
