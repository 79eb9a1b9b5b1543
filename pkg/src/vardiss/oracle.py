"""Closed-form Couette solutions (constant viscosity, ``U(y) = y``).

Each frequency evolves independently by ``dW/dt = -mu (k^2 + (xi - k t)^2) W``.
Nothing here imports the solver.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CouetteParams:
    mu: float
    k: int
    xi: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.k == 0:
            raise ValueError("k must be nonzero")


def decay_exponent(mu, k, xi, t):
    """``mu (k^2 t + (xi^3 - (xi - k t)^3) / (3k))``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    xi = np.asarray(xi, dtype=float)
    return mu * (k * k * t + (xi ** 3 - (xi - k * t) ** 3) / (3.0 * k))


def couette_exact(params, t, W0_hat):
    """Frequency-side amplitude at time ``t`` from amplitude ``W0_hat`` at 0."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return W0_hat * np.exp(-decay_exponent(params.mu, params.k, params.xi, t))


def couette_field(mu, k, grid, t, W0):
    """Evolve grid samples ``W0`` exactly to time ``t`` (all frequencies at once)."""
    W0_hat = np.fft.fft(W0)
    return np.fft.ifft(W0_hat * np.exp(-decay_exponent(mu, k, grid.xi, t)))
