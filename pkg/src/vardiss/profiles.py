"""Stratified viscosity profiles, the shear equilibria they support, and
quantitative checks of the hypotheses under which enhanced dissipation holds.

The equilibrium is fixed by ``mu * U' = sigma``: ``U' = sigma / mu``. Every
quantity the solver needs in the sheared coordinate ``z = U(y)`` follows from
``mu`` and its first two derivatives.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline, PchipInterpolator

KINDS = ("constant", "exponential", "tanh-blend", "tabulated")


class ProfileError(ValueError):
    """Invalid viscosity profile (non-positive or malformed)."""


class NormalizationError(ValueError):
    """The shear slope violates the normalization ``U' >= 1``."""


def _freeze(*arrays):
    for arr in arrays:
        arr.setflags(write=False)


# ---------------------------------------------------------------------------
# Profile families
# ---------------------------------------------------------------------------

def _constant(params):
    mu0 = float(params["mu0"])

    def ev(y):
        y = np.asarray(y, dtype=float)
        return np.full_like(y, mu0), np.zeros_like(y), np.zeros_like(y)
    return ev


def _exponential(params):
    mu0, eps = float(params["mu0"]), float(params["eps"])

    def ev(y):
        mu = mu0 * np.exp(eps * np.asarray(y, dtype=float))
        return mu, eps * mu, eps * eps * mu
    return ev


def _tanh_blend(params):
    # log-space blend: ln mu = ln mu_a + (ln mu_b - ln mu_a) (1 + tanh((y - y0)/w)) / 2
    la, lb = math.log(float(params["mu_a"])), math.log(float(params["mu_b"]))
    w = float(params["width"])
    y0 = float(params.get("center", 0.0))
    delta = lb - la
    if not w > 0:
        raise ProfileError("tanh-blend width must be positive")

    def ev(y):
        x = (np.asarray(y, dtype=float) - y0) / w
        th = np.tanh(x)
        sech2 = 1.0 - th * th
        ell = la + 0.5 * delta * (1.0 + th)
        d1 = 0.5 * delta * sech2 / w
        d2 = -delta * sech2 * th / (w * w)
        mu = np.exp(ell)
        return mu, mu * d1, mu * (d2 + d1 * d1)
    return ev


def _tabulated(params):
    ys = np.asarray(params["y"], dtype=float)
    mus = np.asarray(params["mu"], dtype=float)
    if ys.shape != mus.shape or ys.size < 4:
        raise ProfileError("tabulated profile needs matching y/mu arrays of length >= 4")
    if np.any(mus <= 0):
        i = int(np.argmin(mus))
        raise ProfileError(f"non-positive viscosity {mus[i]:g} at y = {ys[i]:g}")
    spline = CubicSpline(ys, mus)

    def ev(y):
        y = np.asarray(y, dtype=float)
        return spline(y), spline(y, 1), spline(y, 2)
    return ev


_FAMILIES = {
    "constant": _constant,
    "exponential": _exponential,
    "tanh-blend": _tanh_blend,
    "tabulated": _tabulated,
}


@dataclass(frozen=True)
class ViscosityProfile:
    """Viscosity ``mu(y)`` sampled on the periodic grid ``y_i = -L_y + i h``."""

    kind: str
    params: dict
    L_y: float
    n_points: int
    y: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    dmu: np.ndarray = field(repr=False)
    d2mu: np.ndarray = field(repr=False)
    _evaluator: object = field(repr=False, compare=False, default=None)

    @property
    def h(self):
        return 2.0 * self.L_y / self.n_points

    def evaluate(self, y):
        """Return ``(mu, mu', mu'')`` at arbitrary points."""
        return self._evaluator(y)

    def describe(self):
        return {"kind": self.kind, "params": self.params, "L_y": self.L_y,
                "n_points": self.n_points}


def build_profile(kind, params, L_y, n_points):
    """Sample a viscosity family on ``[-L_y, L_y)``.

    Raises
    ------
    ProfileError
        Unknown kind, bad parameters, or ``mu <= 0`` somewhere on the grid.
    """
    if kind not in _FAMILIES:
        raise ProfileError(f"unknown profile kind {kind!r}; expected one of {KINDS}")
    if n_points < 16:
        raise ProfileError("n_points must be >= 16")
    if not L_y > 0:
        raise ProfileError("L_y must be positive")
    try:
        ev = _FAMILIES[kind](params)
    except KeyError as exc:
        raise ProfileError(f"{kind} profile is missing parameter {exc}") from None
    y = -L_y + (2.0 * L_y / n_points) * np.arange(n_points)
    mu, dmu, d2mu = (np.array(v, dtype=float) for v in ev(y))
    bad = ~(mu > 0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ProfileError(f"non-positive viscosity {mu[i]:g} at y = {y[i]:g}")
    _freeze(y, mu, dmu, d2mu)
    return ViscosityProfile(kind, dict(params), float(L_y), int(n_points),
                            y, mu, dmu, d2mu, ev)


def derivative_consistency(profile):
    """Max pointwise ``|FD - analytic| / (h^2 * scale)`` for ``mu'`` and ``mu''``.

    Centered differences on interior nodes; ``scale`` is the sup of the
    derivative being compared (or of ``mu`` when that vanishes).
    """
    h, mu = profile.h, profile.mu
    fd1 = (mu[2:] - mu[:-2]) / (2 * h)
    fd2 = (mu[2:] - 2 * mu[1:-1] + mu[:-2]) / (h * h)
    out = []
    for fd, exact in ((fd1, profile.dmu[1:-1]), (fd2, profile.d2mu[1:-1])):
        scale = np.max(np.abs(exact)) or np.max(mu)
        out.append(float(np.max(np.abs(fd - exact)) / (h * h * scale)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Equilibrium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShearEquilibrium:
    """Shear flow ``U`` with ``mu U' = sigma`` and its coordinate maps.

    Arrays on the profile y-grid: ``U, Up, Upp`` and ``z_of_y`` (= ``U``).
    Arrays on the uniform z-grid ``z_u``: ``y_of_z`` and the coefficients
    ``a = U'``, ``b = mu`` with their first two z-derivatives.
    """

    profile: ViscosityProfile
    sigma: float
    U: np.ndarray = field(repr=False)
    Up: np.ndarray = field(repr=False)
    Upp: np.ndarray = field(repr=False)
    z_u: np.ndarray = field(repr=False)
    y_of_z: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    a_z: np.ndarray = field(repr=False)
    a_zz: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    b_z: np.ndarray = field(repr=False)
    b_zz: np.ndarray = field(repr=False)
    _inverse: object = field(repr=False, compare=False, default=None)

    @property
    def y(self):
        return self.profile.y

    @property
    def z_of_y(self):
        return self.U

    @property
    def z_range(self):
        return float(self.U[0]), float(self.U[-1])

    def y_at(self, z):
        """Inverse shear map ``y = U^{-1}(z)`` (monotone cubic)."""
        z = np.asarray(z, dtype=float)
        lo, hi = self.z_range
        if np.any(z < lo - 1e-9 * max(1.0, abs(lo))) or np.any(z > hi + 1e-9 * max(1.0, abs(hi))):
            raise ValueError(f"z outside the equilibrium range [{lo:g}, {hi:g}]")
        return self._inverse(z)

    def U_at(self, y):
        """Shear map ``z = U(y)`` at arbitrary points (cubic spline of the quadrature)."""
        return CubicSpline(self.y, self.U)(np.asarray(y, dtype=float))

    def coefficients_at(self, z):
        """Solver coefficients at arbitrary ``z``: dict with y, a, b, mu1, mu2, Upp."""
        y = self.y_at(z)
        mu, mu1, mu2 = self.profile.evaluate(y)
        a = self.sigma / mu
        return {"y": y, "a": a, "b": mu, "mu1": mu1, "mu2": mu2,
                "Upp": -a * mu1 / mu}


def _z_derivatives(sigma, mu, mu1, mu2):
    a = sigma / mu
    r = mu1 / mu
    upp = -a * r
    r_y = mu2 / mu - r * r
    uppp = -upp * r - a * r_y
    a_z = upp / a
    a_zz = (uppp / a - upp * upp / (a * a)) / a
    b_z = mu1 / a
    b_zz = (mu2 / a - mu1 * upp / (a * a)) / a
    return a, a_z, a_zz, mu, b_z, b_zz


def build_equilibrium(profile, sigma=None):
    """Construct the shear equilibrium ``U' = sigma / mu`` with ``U(0) = 0``.

    ``sigma`` defaults to ``max mu`` so that ``min U' = 1``.
    """
    mu = profile.mu
    if sigma is None:
        sigma = float(np.max(mu))
    sigma = float(sigma)
    Up = sigma / mu
    if np.min(Up) < 1.0 - 1e-12:
        raise NormalizationError(
            f"min U' = {np.min(Up):.6g} < 1; rescale sigma to at least {np.max(mu):.6g}")
    Upp = -Up * profile.dmu / mu
    U = cumulative_simpson(Up, x=profile.y, initial=0.0)
    U = U - float(CubicSpline(profile.y, U)(0.0)) if profile.y[0] <= 0.0 <= profile.y[-1] else U
    if np.any(np.diff(U) <= 0):
        raise NormalizationError("shear map U is not strictly increasing")
    inverse = PchipInterpolator(U, profile.y)
    n = profile.n_points
    z_u = U[0] + (U[-1] - U[0]) * np.arange(n) / n
    y_of_z = inverse(z_u)
    coeffs = _z_derivatives(sigma, *profile.evaluate(y_of_z))
    _freeze(U, Up, Upp, z_u, y_of_z, *coeffs)
    return ShearEquilibrium(profile, sigma, U, Up, Upp, z_u, y_of_z, *coeffs, inverse)


def local_rates(eq):
    """Effective dissipation ``mu U'^2`` and its cube root on the y-grid."""
    nu = eq.profile.mu * eq.Up ** 2
    return nu, np.cbrt(nu)


def table_constants(eq):
    """``(nu, u)``: infima of ``mu U'^2`` and ``U'`` over the y-grid."""
    nu, _ = local_rates(eq)
    return float(np.min(nu)), float(np.min(eq.Up))


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

@dataclass
class Condition:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "passed": self.passed, **({"detail": self.detail} if self.detail else {})}


@dataclass
class AdmissibilityReport:
    conditions: list
    alternatives: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name):
        for c in self.conditions + self.alternatives:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.conditions if not c.passed]

    def to_dict(self):
        return {"passed": self.passed,
                "conditions": [c.to_dict() for c in self.conditions],
                "alternatives": [c.to_dict() for c in self.alternatives]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def fourier_l1_tail(f, fprime, h, cutoff):
    """L^1 mass of the Fourier-series coefficients of ``f`` at ``|xi| >= cutoff``.

    Frequencies resolved by the grid are summed directly. The part beyond the
    grid Nyquist frequency is bounded by Cauchy-Schwarz,
    ``sum |c| <= (sum xi^-2)^(1/2) (mean |f'|^2)^(1/2)``.
    Returns ``(total, resolved, unresolved_bound)``.
    """
    n = len(f)
    c = np.fft.fft(f) / n
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    resolved = float(np.sum(np.abs(c[np.abs(xi) >= cutoff])))
    big = max(cutoff, np.pi / h)
    dxi = 2.0 * np.pi / (n * h)
    tail_weights = 2.0 * (1.0 / big ** 2 + 1.0 / (dxi * big))
    bound = float(np.sqrt(tail_weights * np.mean(np.abs(fprime) ** 2)))
    return resolved + bound, resolved, bound


def fourier_sup_tail(f, fprime, h, cutoff):
    """Sup of ``|c_j|`` over ``|xi_j| >= cutoff`` (unresolved part bounded by ``|f'|/xi``)."""
    n = len(f)
    c = np.fft.fft(f) / n
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    sel = np.abs(c[np.abs(xi) >= cutoff])
    resolved = float(sel.max()) if sel.size else 0.0
    bound = float(np.sqrt(np.mean(np.abs(fprime) ** 2)) / max(cutoff, np.pi / h))
    return max(resolved, bound), resolved, bound


def validate_profile(eq):
    """Measure every smallness hypothesis; failures are reported, never raised."""
    p = eq.profile
    mu, Up = p.mu, eq.Up
    r = p.dmu / mu
    r_y = p.d2mu / mu - r * r
    sup_mu, inf_mu = float(mu.max()), float(mu.min())
    nu, u = table_constants(eq)
    G = 0.1 * nu ** (-1.0 / 3.0)
    conds = []

    n1, n2 = float(np.max(np.abs(r))), float(np.max(np.abs(Up * r_y)))
    conds.append(Condition("gradual_variation", n1 + n2, 1e-3, n1 + n2 < 1e-3,
                           {"mu'/mu": n1, "U' d(mu'/mu)": n2}))

    cutoff = sup_mu ** (-1.0 / 3.0)
    tot, res, bnd = fourier_l1_tail(p.dmu, p.d2mu, p.h, cutoff)
    conds.append(Condition("fourier_tail", tot / sup_mu, 1e-3, tot / sup_mu < 1e-3,
                           {"cutoff": cutoff, "resolved": res / sup_mu,
                            "unresolved_bound": bnd / sup_mu}))

    aspect = sup_mu ** 2 / inf_mu
    conds.append(Condition("aspect", aspect, 0.1, aspect < 0.1))

    c1 = 100.0 / G * float(np.max(np.abs(eq.Upp / Up ** 2)))
    conds.append(Condition("cond1", c1, 1e-3, c1 <= 1e-3, {"G": G, "nu": nu}))

    hz = eq.z_u[1] - eq.z_u[0]
    tot, res, bnd = fourier_l1_tail(eq.b_z, eq.b_zz, hz, G)
    c2 = tot / (G * inf_mu)
    conds.append(Condition("cond2", c2, 0.1, c2 <= 0.1,
                           {"resolved": res / (G * inf_mu), "unresolved_bound": bnd / (G * inf_mu)}))

    sup_c, res, bnd = fourier_sup_tail(eq.a, eq.a_z, hz, 2 * G)
    conds.append(Condition("u_prime_tail", sup_c / u, 0.5, sup_c / u <= 0.5,
                           {"resolved": res / u, "unresolved_bound": bnd / u}))

    umin = float(Up.min())
    conds.append(Condition("u_prime_min", umin, 1.0, umin >= 1.0 - 1e-12))

    # alternative reading of the gradual-variation bound (W^{1,inf} norm below 0.1)
    w1 = n1 + float(np.max(np.abs(r_y)))
    alt = Condition("gradual_variation_w1inf", w1, 0.1, w1 < 0.1,
                    {"binding": "gradual_variation" if (n1 + n2) / 1e-3 >= w1 / 0.1
                     else "gradual_variation_w1inf"})
    return AdmissibilityReport(conds, [alt])
