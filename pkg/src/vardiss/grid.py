"""Uniform periodic z-grid with unitary DFT, spectral derivatives and quadrature."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ZGrid:
    """Periodic grid on ``[center - L_z, center + L_z)``.

    Attributes
    ----------
    L_z : float
        Half-length of the periodic cell.
    n : int
        Number of nodes (power of two).
    center : float
        Midpoint of the cell; windows away from ``z = 0`` use this.
    """

    L_z: float
    n: int
    center: float = 0.0
    z: np.ndarray = field(init=False, repr=False, compare=False)
    xi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 4, got {self.n}")
        if not self.L_z > 0:
            raise ValueError("L_z must be positive")
        h = 2.0 * self.L_z / self.n
        z = self.center - self.L_z + h * np.arange(self.n)
        xi = 2.0 * np.pi * np.fft.fftfreq(self.n, d=h)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "xi", xi)
        for arr in (z, xi):
            arr.setflags(write=False)

    @property
    def h(self):
        return 2.0 * self.L_z / self.n

    @property
    def dxi(self):
        return np.pi / self.L_z

    def plane_wave(self, j):
        """Samples of ``exp(i xi_j z)``, phase-referenced to the first node."""
        return np.exp(1j * self.xi[j] * (self.z - self.z[0]))

    def _check(self, values):
        values = np.asarray(values)
        if values.shape[-1] != self.n:
            raise ValueError(f"expected trailing length {self.n}, got {values.shape[-1]}")
        return values


def dft(grid, values):
    """Unitary forward DFT along the last axis."""
    return np.fft.fft(grid._check(values), norm="ortho")


def idft(grid, values):
    """Unitary inverse DFT along the last axis."""
    return np.fft.ifft(grid._check(values), norm="ortho")


def d_dz(grid, values, order=1):
    """Spectral ``order``-th derivative. The Nyquist mode is dropped for odd orders."""
    symbol = (1j * grid.xi) ** order
    if order % 2:
        symbol[grid.n // 2] = 0.0
    out = idft(grid, symbol * dft(grid, values))
    return out.real if np.isrealobj(values) else out


def weighted_norm(grid, values, weight=None):
    """``sqrt(h * sum(w |f|^2))``, the discrete ``L^2(w dz)`` norm."""
    values = grid._check(values)
    if weight is None:
        weight = 1.0
    weight = np.asarray(weight, dtype=float)
    if np.any(weight < 0):
        raise ValueError("weights must be non-negative")
    return float(np.sqrt(grid.h * np.sum(weight * np.abs(values) ** 2)))


def inner(grid, f, g):
    """``<f, g> = h * sum(f conj(g))``."""
    return complex(grid.h * np.sum(grid._check(f) * np.conj(grid._check(g))))


def circulant_generator(values):
    """Generator ``c`` with ``F diag(values) F^H = [c[(i - j) mod n]]`` for the unitary DFT."""
    return np.fft.fft(values) / len(values)


def series_coefficients(values):
    """Fourier-series coefficients ``(1/2L) int f exp(-i xi z) dz`` from samples."""
    return np.fft.fft(values) / len(values)
