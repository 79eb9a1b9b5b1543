"""Linearized shear-flow dynamics with stratified viscosity.

Pseudo-spectral solver for a single x-mode of the vorticity in the moving
frame, the Fourier multiplier energy built on it, the viscosity partition
of unity, and a CLI for reproducible runs.
"""

from .diagnostics import (EnergyTrace, Recorder, check_localized_decay, check_lyapunov,
                          dissipation_phys, energy_EA, energy_HN, fit_rate)
from .dynamics import Coefficients, ModeSolver, ModeState, NumericalError, run
from .grid import ZGrid
from .kernels import BACKEND
from .multiplier import MultiplierTable, m_value
from .oracle import couette_exact, couette_field
from .partition import Partition, PartitionError, build_partition
from .profiles import (NormalizationError, ProfileError, ShearEquilibrium, ViscosityProfile,
                       build_equilibrium, build_profile, validate_profile)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Coefficients", "EnergyTrace", "ModeSolver", "ModeState", "MultiplierTable",
    "NormalizationError", "NumericalError", "Partition", "PartitionError", "ProfileError",
    "Recorder", "ShearEquilibrium", "ViscosityProfile", "ZGrid", "build_equilibrium",
    "build_partition", "build_profile", "check_localized_decay", "check_lyapunov",
    "couette_exact", "couette_field", "dissipation_phys", "energy_EA", "energy_HN", "fit_rate",
    "m_value", "run", "validate_profile",
]
