"""Moving-frame vorticity dynamics for one horizontal wavenumber ``k``.

In the sheared coordinate ``z = U(y)`` with ``W(t, x, z) = omega(t, x + t U(y), y)``
a single mode obeys

    dW/dt = U'' V2 + div_t(mu grad_t W) - div_t(mu' grad_t V1) - i k mu'' V2,

where ``grad_t = (i k, a D)``, ``D = d/dz - i k t``, ``a = U'`` and the stream
function solves ``(-k^2 + (a D)^2) phi = W`` with ``V1 = -a D phi``, ``V2 = i k phi``.

``D`` acts on the DFT side as multiplication by ``i eta``, ``eta = xi - k t``,
so shear never costs resolution. Products with variable coefficients become
circulant matrices in frequency; the two linear solves (stream function and
Crank-Nicolson) are Hermitian positive definite there and are done by dense
Cholesky, or diagonally when the coefficients are constant.

Using ``mu U' = sigma`` the diffusion splits exactly as
``div_t(mu grad_t W) = -k^2 mu W + sigma a D^2 W``.
"""

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import kernels
from .grid import circulant_generator, dft, idft


class NumericalError(RuntimeError):
    """A linear solve failed or the state became non-finite."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


@dataclass(frozen=True)
class ModeState:
    k: int
    t: float
    W_hat: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("k must be nonzero")


@dataclass(frozen=True)
class StreamPair:
    phi: np.ndarray
    psi: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    residual: float
    grad_phi: float
    grad_psi: float


@dataclass(frozen=True)
class Coefficients:
    """Equilibrium coefficients sampled at the nodes of a z-grid."""

    sigma: float
    a: np.ndarray
    b: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    Upp: np.ndarray
    u: float

    @classmethod
    def from_equilibrium(cls, eq, grid):
        c = eq.coefficients_at(grid.z)
        return cls(eq.sigma, c["a"], c["b"], c["mu1"], c["mu2"], c["Upp"],
                   float(np.min(eq.Up)))

    @classmethod
    def constant(cls, mu, n, sigma=None):
        """Couette: ``mu`` constant, ``U' = sigma / mu`` (1 by default)."""
        sigma = mu if sigma is None else sigma
        one = np.ones(n)
        zero = np.zeros(n)
        return cls(sigma, one * sigma / mu, one * mu, zero, zero, zero, sigma / mu)

    @property
    def is_constant(self):
        return (np.ptp(self.a) <= 1e-14 * self.a[0] and np.ptp(self.b) <= 1e-14 * self.b[0]
                and not self.has_corrections)

    @property
    def has_corrections(self):
        return bool(np.any(self.mu1) or np.any(self.mu2) or np.any(self.Upp))


class ModeSolver:
    """Stream solves, right-hand side and IMEX stepping for one ``k``.

    Stream-function factorizations are cached by time (the predictor of one
    step and the explicit stage of the next share one); the Crank-Nicolson
    factorization is rebuilt for every step.
    """

    def __init__(self, coeffs, grid, k, backend=None):
        if k == 0:
            raise ValueError("k must be nonzero")
        self.c = coeffs
        self.grid = grid
        self.k = int(k)
        self.backend = backend
        self.constant = coeffs.is_constant
        self.corrections = coeffs.has_corrections
        a = coeffs.a
        self._g_a = circulant_generator(a)
        self._g_k2a = circulant_generator(self.k ** 2 / a)
        self._inv_a = 1.0 / a
        self._stream_cache = {}
        self.stream_log = None  # set to a list to record (t, |grad phi|, |grad psi|, residual)

    @classmethod
    def from_equilibrium(cls, eq, grid, k, backend=None):
        return cls(Coefficients.from_equilibrium(eq, grid), grid, k, backend)

    # -- frequency-side helpers -------------------------------------------

    def eta(self, t):
        return self.grid.xi - self.k * t

    def D(self, t, f):
        return idft(self.grid, 1j * self.eta(t) * dft(self.grid, f))

    def D2(self, t, f):
        return idft(self.grid, -self.eta(t) ** 2 * dft(self.grid, f))

    def _factor(self, H, what, t):
        try:
            return cho_factor(H, lower=True, check_finite=False)
        except LinAlgError as exc:
            raise NumericalError(f"{what} factorization failed at t={t:g}",
                                 {"k": self.k, "t": t, "what": what}) from exc

    # -- stream function --------------------------------------------------

    def _stream_factor(self, t):
        fac = self._stream_cache.get(t)
        if fac is None:
            eta = self.eta(t)
            if self.constant:
                fac = ("diag", self.c.a[0] * eta ** 2 + self.k ** 2 / self.c.a[0])
            else:
                H = kernels.assemble_fourier_matrix(eta, self._g_a, self._g_k2a,
                                                    np.zeros_like(eta), backend=self.backend)
                fac = ("chol", self._factor(H, "stream", t))
            if len(self._stream_cache) > 4:
                self._stream_cache.pop(next(iter(self._stream_cache)))
            self._stream_cache[t] = fac
        return fac

    def stream_operator(self, t, phi):
        """``(-k^2 + (a D)^2) phi``."""
        a = self.c.a
        return -self.k ** 2 * phi + a * self.D(t, a * self.D(t, phi))

    def solve_stream(self, t, W):
        kind, fac = self._stream_factor(t)
        rhs = dft(self.grid, -W * self._inv_a)
        phi_hat = rhs / fac if kind == "diag" else cho_solve(fac, rhs, check_finite=False)
        phi = idft(self.grid, phi_hat)
        eta = self.eta(t)
        u = self.c.u
        sym = self.k ** 2 + (u * eta) ** 2
        psi_hat = -dft(self.grid, W) / sym
        psi = idft(self.grid, psi_hat)
        V1 = -self.c.a * idft(self.grid, 1j * eta * phi_hat)
        V2 = 1j * self.k * phi
        res = np.linalg.norm(self.stream_operator(t, phi) - W)
        scale = np.linalg.norm(W)
        res = float(res / scale) if scale else float(res)
        h = self.grid.h
        grad_phi = float(np.sqrt(h * np.sum(np.abs(V1) ** 2 + np.abs(V2) ** 2)))
        grad_psi = float(np.sqrt(h * np.sum(sym * np.abs(psi_hat) ** 2)))
        if self.stream_log is not None:
            self.stream_log.append((t, grad_phi, grad_psi, res))
        return StreamPair(phi, psi, V1, V2, res, grad_phi, grad_psi)

    # -- right-hand side --------------------------------------------------

    def div_t(self, t, f, g):
        """``div_t(f grad_t g) = -k^2 f g + a D(f a D g)``."""
        a = self.c.a
        return -self.k ** 2 * f * g + a * self.D(t, f * a * self.D(t, g))

    def implicit(self, t, W):
        """``-k^2 mu W + sigma a D^2 W``."""
        return -self.k ** 2 * self.c.b * W + self.c.sigma * self.c.a * self.D2(t, W)

    def explicit(self, t, W, stream=None):
        if not self.corrections:
            return np.zeros_like(W, dtype=complex)
        sp = stream or self.solve_stream(t, W)
        c = self.c
        return (c.Upp * sp.V2 - self.div_t(t, c.mu1, sp.V1)
                - 1j * self.k * c.mu2 * sp.V2)

    def rhs(self, t, W):
        return self.implicit(t, W) + self.explicit(t, W)

    # -- time stepping ----------------------------------------------------

    def _cn_solver(self, t_mid, theta):
        eta = self.eta(t_mid)
        sig = self.c.sigma
        if self.constant:
            lam = -self.k ** 2 * self.c.b[0] - sig * self.c.a[0] * eta ** 2
            denom = 1.0 - theta * lam
            return lambda r: idft(self.grid, dft(self.grid, r) / denom)
        q = 1.0 / (theta * sig * self.c.a) + self.k ** 2 / self.c.a ** 2
        gq = circulant_generator(q)
        zero = np.zeros_like(eta)
        H = kernels.assemble_fourier_matrix(zero, np.zeros_like(gq), gq, eta ** 2,
                                            backend=self.backend)
        fac = self._factor(H, "Crank-Nicolson", t_mid)
        scale = 1.0 / (theta * sig * self.c.a)
        return lambda r: idft(self.grid, cho_solve(fac, dft(self.grid, r * scale),
                                                   check_finite=False))

    def step(self, state, dt):
        """One IMEX step: Crank-Nicolson diffusion, Heun for the rest."""
        if not dt > 0:
            raise ValueError("dt must be positive")
        t0, W = state.t, np.asarray(state.W_hat, dtype=complex)
        t1 = t0 + dt
        theta = 0.5 * dt
        tm = t0 + 0.5 * dt
        solve = self._cn_solver(tm, theta)
        base = W + theta * self.implicit(tm, W)
        if self.corrections:
            N0 = self.explicit(t0, W)
            W_star = solve(base + dt * N0)
            N1 = self.explicit(t1, W_star)
            W_new = solve(base + 0.5 * dt * (N0 + N1))
        else:
            W_new = solve(base)
        if not np.all(np.isfinite(W_new)):
            raise NumericalError(f"non-finite state at t={t1:g}",
                                 {"k": self.k, "t": t1, "norm_before": float(np.linalg.norm(W))})
        return replace(state, t=t1, W_hat=W_new)

    def solve_stream_fd(self, t, W):
        """Second-order finite-difference stream solve (cyclic tridiagonal).

        Only accurate while ``k t h`` is small; kept as an independent check
        of the spectral solver at early times.
        """
        h = self.grid.h
        a = self.c.a
        a_z = np.gradient(a, h)
        ikt = 1j * self.k * t
        # (a D)^2 = a^2 (d_zz - 2ikt d_z - k^2 t^2) + a a_z (d_z - ikt)
        c2 = a * a / h ** 2
        c1 = (-2 * ikt * a * a + a * a_z) / (2 * h)
        c0 = -self.k ** 2 + a * a * ikt ** 2 - a * a_z * ikt
        lo, mid, hi = c2 - c1, c0 - 2 * c2, c2 + c1
        return kernels.cyclic_tridiag_solve(lo, mid.astype(complex), hi, np.asarray(W, complex),
                                            backend=self.backend)


def run(solver, state, dt, T, stride=1, on_sample=None):
    """Integrate to time ``T``; record every ``stride``-th state (and the first/last).

    Times are ``t0 + i dt`` computed from the step index, not accumulated.
    """
    t0 = state.t
    n_steps = int(round((T - t0) / dt))
    if n_steps < 0 or abs(t0 + n_steps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError("T - t0 must be a non-negative multiple of dt")
    samples = [state]
    if on_sample:
        on_sample(state)
    for i in range(1, n_steps + 1):
        state = solver.step(state, dt)
        state = replace(state, t=t0 + i * dt)
        if i % stride == 0 or i == n_steps:
            samples.append(state)
            if on_sample:
                on_sample(state)
    return samples


def flag_fast_mode(nu, k):
    """True when ``nu k^2 >= 0.001 nu^(1/3)``: plain diffusion dominates this mode."""
    return nu * k * k >= 1e-3 * np.cbrt(nu)


# -- convenience wrappers -----------------------------------------------------

def solve_stream(eq, grid, k, t, W_hat):
    return ModeSolver.from_equilibrium(eq, grid, k).solve_stream(t, W_hat)


def rhs(eq, grid, k, t, W_hat):
    return ModeSolver.from_equilibrium(eq, grid, k).rhs(t, W_hat)


def step_imex(eq, grid, state, dt):
    return ModeSolver.from_equilibrium(eq, grid, state.k).step(state, dt)


def step_mean(profile, omega_mean, dt, backend=None):
    """Crank-Nicolson step of ``d_t w = d_yy(mu w)`` on the periodic y-grid.

    The centered stencil has zero column sums, so ``sum(w) h`` is conserved.
    """
    mu = profile.mu
    h = profile.h
    r = 0.5 * dt / h ** 2
    f = mu * omega_mean
    lap = np.roll(f, -1) - 2 * f + np.roll(f, 1)
    rhs_ = omega_mean + r * lap
    lo = -r * np.roll(mu, 1)
    hi = -r * np.roll(mu, -1)
    mid = 1.0 + 2 * r * mu
    dtype = np.result_type(omega_mean, np.float64)
    return kernels.cyclic_tridiag_solve(lo.astype(dtype), mid.astype(dtype), hi.astype(dtype),
                                        np.asarray(rhs_, dtype=dtype), backend=backend)


# -- checkpoints --------------------------------------------------------------

def save_checkpoint(path, state):
    W = np.asarray(state.W_hat, dtype=complex)
    rec = {"k": state.k, "t": state.t, "provenance": state.provenance,
           "real": W.real.tolist(), "imag": W.imag.tolist()}
    with open(path, "w") as fh:
        json.dump(rec, fh)


def load_checkpoint(path):
    with open(path) as fh:
        rec = json.load(fh)
    W = np.asarray(rec["real"], dtype=float) + 1j * np.asarray(rec["imag"], dtype=float)
    return ModeState(int(rec["k"]), float(rec["t"]), W, rec.get("provenance", ""))
