"""Numerical toolkit for the linearized compressible viscoelastic system:
exact whole-space Fourier-multiplier solvers, low-frequency singular
expansions, bounded-domain and parametrix-assembled exterior resolvents, and
time-domain local energy decay measurement."""

from .params import PhysicalParams
from .grid import PeriodicGrid, State, SpectralState, save_snapshot, load_snapshot
from .model import (make_admissible_data, constraint_residual, apply_A_spectral,
                    energy, local_norm)

__all__ = [
    "PhysicalParams", "PeriodicGrid", "State", "SpectralState",
    "save_snapshot", "load_snapshot", "make_admissible_data",
    "constraint_residual", "apply_A_spectral", "energy", "local_norm",
]

__version__ = "0.1.0"
