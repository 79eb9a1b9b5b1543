import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve

from vardiss import kernels
from vardiss.dynamics import (Coefficients, ModeSolver, ModeState, NumericalError,
                              load_checkpoint, run, save_checkpoint, step_mean)
from vardiss.grid import ZGrid, dft, idft
from vardiss.oracle import couette_field
from vardiss.profiles import build_profile

from conftest import ADMISSIBLE, equilibrium, random_field

STEEP = ("tanh-blend", {"mu_a": 0.01, "mu_b": 0.03, "width": 3.0})


def steep_solver(k=1, n=128, L_z=8.0):
    eq = equilibrium(*STEEP, L_y=40.0, n=4096)
    return eq, ModeSolver.from_equilibrium(eq, ZGrid(L_z, n), k)


def test_constant_coefficient_stream_is_dft_division():
    g = ZGrid(6.0, 64)
    s = ModeSolver(Coefficients.constant(0.01, 64), g, 2)
    t, j = 0.7, 5
    W = g.plane_wave(j)
    phi_hat = dft(g, s.solve_stream(t, W).phi)
    expected = dft(g, W) / (-4 - (g.xi - 2 * t) ** 2)
    assert np.allclose(phi_hat, expected, atol=1e-14)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 25.0])
def test_stream_residual_and_comparison(t, rng):
    _, s = steep_solver()
    W = random_field(s.grid, int(rng.integers(1 << 31)))
    sp = s.solve_stream(t, W)
    assert sp.residual <= 1e-10
    assert sp.grad_phi <= sp.grad_psi * (1 + 1e-8)
    # grad_phi is the norm of (V1, V2)
    assert np.isclose(sp.grad_phi ** 2, s.grid.h * np.sum(np.abs(sp.V1) ** 2 + np.abs(sp.V2) ** 2))


def test_fd_stream_agrees_at_early_time():
    """The 2nd-order FD solver converges to the spectral one while k t h is small."""
    errs = []
    for n in (128, 256, 512):
        _, s = steep_solver(n=n, L_z=16.0)
        W = np.exp(-s.grid.z ** 2) + 0j
        ref = s.solve_stream(0.05, W).phi
        # the coefficient a is not periodic; compare away from the cell edge
        inner = np.abs(s.grid.z) <= 4.0
        diff = np.abs(s.solve_stream_fd(0.05, W) - ref)[inner]
        errs.append(np.max(diff) / np.max(np.abs(ref)))
    assert errs[-1] < 2e-4
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_couette_rhs_modewise():
    g = ZGrid(5.0, 64)
    mu, k, t = 0.01, 3, 1.2
    s = ModeSolver(Coefficients.constant(mu, 64), g, k)
    W = np.exp(-g.z ** 2) + 0j
    expected = idft(g, mu * (-k ** 2 - (g.xi - k * t) ** 2) * dft(g, W))
    assert np.allclose(s.rhs(t, W), expected, atol=1e-13)


def test_zero_stays_zero():
    _, s = steep_solver()
    zero = np.zeros(s.grid.n, complex)
    assert np.all(s.rhs(0.4, zero) == 0)
    assert np.all(s.step(ModeState(1, 0.0, zero), 0.1).W_hat == 0)
    eq = equilibrium("constant", {"mu0": 0.01}, 10.0, 64)
    assert np.all(step_mean(eq.profile, np.zeros(64), 0.1) == 0)


def y_frame_rhs(eq, k, t, f, y):
    """The same right-hand side in y-coordinates, by 2nd-order finite differences.

    ``d_t`` (the moving-frame y-derivative) is ``d/dy - i k t U'(y)``.
    """
    hy = y[1] - y[0]
    n = y.size
    mu, mu1, mu2 = eq.profile.evaluate(y)
    Up = eq.sigma / mu
    Upp = -Up * mu1 / mu
    D1 = diags([-1, 1], [-1, 1], shape=(n, n)) / (2 * hy)
    D2 = diags([1, -2, 1], [-1, 0, 1], shape=(n, n)) / hy ** 2
    S = diags(-1j * k * t * Up)
    Dt = (D1 + S).tocsc()
    lap = (-k ** 2 * diags(np.ones(n)) + D2 + 2 * S @ D1 + diags(-1j * k * t * Upp)
           + S @ S).tocsc()
    phi = spsolve(lap, f)
    V1, V2 = -(Dt @ phi), 1j * k * phi

    def div_t(c, g):
        return -k ** 2 * c * g + Dt @ (c * (Dt @ g))

    return Upp * V2 + div_t(mu, f) - div_t(mu1, V1) - 1j * k * mu2 * V2


@pytest.mark.parametrize("t,k", [(0.0, 1), (0.4, 1), (0.3, 2)])
def test_rhs_matches_y_frame_finite_differences(t, k):
    eq, s = steep_solver(k=k, n=512, L_z=20.0)
    def field(z):
        return np.exp(-(z / 1.5) ** 2) * np.exp(0.5j * z)

    spectral = s.rhs(t, field(s.grid.z))
    y = np.linspace(-24.0, 24.0, 48001)
    f = field(eq.U_at(y))
    fd = y_frame_rhs(eq, k, t, f, y)
    y_nodes = eq.y_at(s.grid.z)
    fd_nodes = np.interp(y_nodes, y, fd.real) + 1j * np.interp(y_nodes, y, fd.imag)
    err = np.max(np.abs(fd_nodes - spectral)) / np.max(np.abs(spectral))
    assert err < 1e-5


def test_couette_oracle_short():
    g = ZGrid(20.0, 256)
    s = ModeSolver(Coefficients.constant(1e-3, 256), g, 1)
    W0 = np.exp(-g.z ** 2) + 0j
    out = run(s, ModeState(1, 0.0, W0), 1e-2, 5.0, stride=500)
    ex = couette_field(1e-3, 1, g, 5.0, W0)
    assert np.linalg.norm(out[-1].W_hat - ex) / np.linalg.norm(ex) < 1e-6


def test_second_order_in_time():
    _, s = steep_solver(n=64)
    W0 = np.exp(-s.grid.z ** 2) * np.exp(0.3j * s.grid.z)
    finals = [run(s, ModeState(1, 0.0, W0), dt, 2.0)[-1].W_hat for dt in (0.1, 0.05, 0.025)]
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    assert np.log2(e1 / e2) >= 1.9


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_linearity(seed, alpha, beta):
    _, s = steep_solver(n=64)
    W1, W2 = random_field(s.grid, seed), random_field(s.grid, seed + 1)
    st_ = lambda W: s.step(ModeState(1, 1.0, W), 0.05).W_hat
    lhs = st_(alpha * W1 + beta * W2)
    rhs = alpha * st_(W1) + beta * st_(W2)
    scale = max(1.0, np.max(np.abs(lhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@pytest.mark.parametrize("kind,params", ADMISSIBLE[::2])
def test_l2_nonincreasing_on_admissible(kind, params):
    eq = equilibrium(kind, params)
    g = ZGrid(12.0, 128)
    s = ModeSolver.from_equilibrium(eq, g, 1)
    W0 = random_field(g, 7)
    norms = [np.linalg.norm(x.W_hat) ** 2 for x in run(s, ModeState(1, 0.0, W0), 0.02, 6.0)]
    assert np.max(np.diff(norms)) <= 1e-8 * norms[0]


def test_backends_agree():
    if kernels._ext is None:
        pytest.skip("compiled extension not built")
    eq = equilibrium(*STEEP, L_y=40.0, n=4096)
    g = ZGrid(8.0, 64)
    W0 = random_field(g, 3)
    out = [ModeSolver.from_equilibrium(eq, g, 1, backend=b).step(ModeState(1, 0.5, W0), 0.1).W_hat
           for b in ("compiled", "python")]
    assert np.allclose(out[0], out[1], rtol=0, atol=1e-12 * np.max(np.abs(out[0])))


def test_non_finite_state_aborts():
    _, s = steep_solver(n=64)
    W = np.full(64, np.nan, complex)
    with pytest.raises(NumericalError) as info:
        s.step(ModeState(1, 0.0, W), 0.1)
    assert info.value.dump["k"] == 1


def test_run_rejects_misaligned_T():
    _, s = steep_solver(n=64)
    with pytest.raises(ValueError):
        run(s, ModeState(1, 0.0, np.zeros(64, complex)), 0.3, 1.0)


def test_checkpoint_round_trip(tmp_path):
    st_ = ModeState(-2, 1.25, np.array([1 + 2j, -0.5j, 3.0]), "abc")
    save_checkpoint(tmp_path / "c.json", st_)
    back = load_checkpoint(tmp_path / "c.json")
    assert back.k == -2 and back.t == 1.25 and back.provenance == "abc"
    assert np.array_equal(back.W_hat, st_.W_hat)


# -- mean mode -----------------------------------------------------------------

def test_mean_mode_heat_decay():
    mu, L, n = 0.02, 10.0, 4096
    p = build_profile("constant", {"mu0": mu}, L, n)
    xi = 2 * np.pi / (2 * L)
    w = np.cos(xi * p.y)
    dt, steps = 0.05, 200
    for _ in range(steps):
        w = step_mean(p, w, dt)
    expected = np.exp(-mu * xi ** 2 * dt * steps) * np.cos(xi * p.y)
    assert np.max(np.abs(w - expected)) < 1e-8


def test_mean_mode_conserves_mass(rng):
    p = build_profile("tanh-blend", {"mu_a": 0.01, "mu_b": 0.05, "width": 2.0}, 10.0, 256)
    w = rng.normal(size=256)
    m0 = w.sum() * p.h
    for _ in range(50):
        w = step_mean(p, w, 0.5)
    assert abs(w.sum() * p.h - m0) <= 1e-10 * max(1.0, abs(m0))
