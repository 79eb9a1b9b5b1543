"""Time-dependent Fourier multiplier ``m(t, k, xi)`` and the operator ``A``.

On the resonant window ``|xi/k - t| < G`` the multiplier decays along

    dm/dt = -m (nu^(1/3) + u / (1 + u^2 (xi/k - t)^2)),

and it is constant before and after the window, with ``m = 1`` in the far
past. The ODE integrates in closed form, so no time stepping is involved.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grid import dft, idft

VARIANTS = ("A", "B")


@dataclass(frozen=True)
class MultiplierTable:
    """Constants defining ``m``: ``nu = inf mu U'^2`` and ``u = inf U'``."""

    nu: float
    u: float

    def __post_init__(self):
        if not (self.nu > 0 and self.u > 0):
            raise ValueError("nu and u must be positive")

    @property
    def G(self):
        """Half-width of the resonant window, ``0.1 nu^(-1/3)``."""
        return 0.1 * self.nu ** (-1.0 / 3.0)

    @property
    def c(self):
        """Terminal value ``exp(-0.2 - 2 arctan(u G))``."""
        return math.exp(-0.2 - 2.0 * math.atan(self.u * self.G))

    @classmethod
    def from_equilibrium(cls, eq):
        from .profiles import table_constants
        return cls(*table_constants(eq))

    def to_dict(self):
        return {"nu": self.nu, "u": self.u, "G": self.G, "c": self.c}


def _check_k(k):
    if k == 0:
        raise ValueError("the multiplier is undefined for k = 0")


def m_value(table, t, k, xi):
    """Closed-form ``m(t, k, xi)``; broadcasts over ``t`` and ``xi``."""
    _check_k(k)
    s = np.asarray(t, dtype=float) - np.asarray(xi, dtype=float) / k
    G, u = table.G, table.u
    inside = np.exp(-(np.cbrt(table.nu) * (s + G) + np.arctan(u * s) + math.atan(u * G)))
    out = np.where(s <= -G, 1.0, np.where(s >= G, table.c, inside))
    return out if out.ndim else float(out)


def m_rate(table, t, k, xi):
    """``d(log m)/dt``: zero off the window, negative on it."""
    _check_k(k)
    s = np.asarray(t, dtype=float) - np.asarray(xi, dtype=float) / k
    rate = -(np.cbrt(table.nu) + table.u / (1.0 + (table.u * s) ** 2))
    return np.where(np.abs(s) < table.G, rate, 0.0)


def bad_set_indicator(table, t, k, xi):
    """True where ``|xi/k - t| < G`` (the resonant set)."""
    _check_k(k)
    return np.abs(np.asarray(xi, dtype=float) / k - t) < table.G


def symbol(table, grid, k, t):
    """``m`` sampled on the grid frequency ladder."""
    return m_value(table, t, k, grid.xi)


def apply_A(table, grid, k, t, W_hat):
    """``A W = F^-1 m F W``."""
    return idft(grid, symbol(table, grid, k, t) * dft(grid, W_hat))


def apply_A_inverse(table, grid, k, t, W_hat):
    return idft(grid, dft(grid, W_hat) / symbol(table, grid, k, t))


def weight(table, k, t, xi, variant="A"):
    """Dissipation weight ``w(xi)``.

    ``A``: ``nu^(1/3) + nu eta^2 + 1 / (1 + u^2 eta^2)`` with ``eta = xi - k t``.
    ``B``: ``nu^(1/3) + nu eta^2 + u / (1 + u^2 (xi/k - t)^2)``.
    """
    _check_k(k)
    xi = np.asarray(xi, dtype=float)
    eta = xi - k * t
    base = np.cbrt(table.nu) + table.nu * eta * eta
    if variant == "A":
        return base + 1.0 / (1.0 + (table.u * eta) ** 2)
    if variant == "B":
        return base + table.u / (1.0 + (table.u * (xi / k - t)) ** 2)
    raise ValueError(f"unknown weight variant {variant!r}; expected one of {VARIANTS}")


def apply_weight(table, grid, k, t, W_hat, variant="A"):
    return idft(grid, weight(table, k, t, grid.xi, variant) * dft(grid, W_hat))


def multiplier_grid(table, k, times, xis):
    """``m`` on the tensor grid ``times x xis`` (rows are times)."""
    return m_value(table, np.asarray(times)[:, None], k, np.asarray(xis)[None, :])
