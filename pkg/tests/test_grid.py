import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vardiss.grid import ZGrid, d_dz, dft, idft, inner, weighted_norm


def test_constant_is_delta_at_zero():
    g = ZGrid(5.0, 64)
    F = dft(g, np.ones(64))
    assert abs(F[0] - np.sqrt(64)) < 1e-12
    assert np.max(np.abs(F[1:])) < 1e-12


def test_plane_wave_is_delta():
    g = ZGrid(5.0, 64)
    F = dft(g, g.plane_wave(5))
    assert np.argmax(np.abs(F)) == 5
    assert np.max(np.abs(np.delete(F, 5))) < 1e-12


def test_frequency_spacing():
    g = ZGrid(7.0, 32)
    assert np.isclose(g.xi[1] - g.xi[0], np.pi / 7.0)
    assert np.isclose(g.dxi, np.pi / 7.0)


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        ZGrid(1.0, 48)
    with pytest.raises(ValueError):
        ZGrid(-1.0, 64)
    with pytest.raises(ValueError):
        dft(ZGrid(1.0, 64), np.ones(32))


def test_sine_derivative_exact():
    g = ZGrid(3.0, 64)
    f = np.sin(np.pi * g.z / 3.0)
    assert np.max(np.abs(d_dz(g, f) - np.pi / 3.0 * np.cos(np.pi * g.z / 3.0))) < 1e-10


def test_norm_of_one():
    g = ZGrid(4.0, 128)
    assert np.isclose(weighted_norm(g, np.ones(128), np.ones(128)), np.sqrt(8.0))
    with pytest.raises(ValueError):
        weighted_norm(g, np.ones(128), -np.ones(128))


def test_spectral_vs_finite_differences_second_order():
    errs = []
    for n in (64, 128, 256):
        g = ZGrid(8.0, n)
        f = np.exp(-g.z ** 2)
        fd = (np.roll(f, -1) - np.roll(f, 1)) / (2 * g.h)
        errs.append(np.max(np.abs(fd - d_dz(g, f))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([16, 64, 256]))
def test_round_trip_and_parseval(seed, n):
    g = ZGrid(2.5, n)
    r = np.random.default_rng(seed)
    f = r.normal(size=n) + 1j * r.normal(size=n)
    assert np.allclose(idft(g, dft(g, f)), f, rtol=0, atol=1e-12 * np.max(np.abs(f)))
    lhs = g.h * np.sum(np.abs(f) ** 2)
    rhs = g.h * np.sum(np.abs(dft(g, f)) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * lhs


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_derivative_antisymmetry(seed):
    g = ZGrid(3.0, 64)
    r = np.random.default_rng(seed)
    # smooth periodic fields: random low modes
    c = r.normal(size=(2, 8)) + 1j * r.normal(size=(2, 8))
    f = sum(c[0, j] * g.plane_wave(j) for j in range(8))
    h = sum(c[1, j] * g.plane_wave(j) for j in range(8))
    lhs = inner(g, d_dz(g, f), h)
    rhs = -inner(g, f, d_dz(g, h))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
