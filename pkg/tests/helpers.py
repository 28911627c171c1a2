"""Shared construction of admissible test data."""

import numpy as np

from vwaves.grid import State
from vwaves.model import (dipole_bump_field, make_admissible_data,
                          radial_bump_field)


def admissible_data(grid, params, seed=0, radius=None, with_w=True):
    """Seeded admissible State: G = grad(psi) from radial bumps, zero-mean
    dipole velocity profiles."""
    rng = np.random.default_rng(seed)
    if radius is None:
        radius = min(2.0, grid.L / 4.0)
    amps = rng.uniform(-1.0, 1.0, 6)
    psi = np.stack([radial_bump_field(grid, radius=radius, amplitude=amps[i])
                    for i in range(3)])
    w = None
    if with_w:
        w = np.stack([dipole_bump_field(grid, radius=0.75 * radius,
                                        amplitude=amps[3 + i], axis=i)
                      for i in range(3)])
    return make_admissible_data(psi, w, grid, params)


def inadmissible_data(grid, radius=None):
    """phi a bump, everything else zero: violates the constraint."""
    if radius is None:
        radius = min(2.0, grid.L / 4.0)
    f = State(grid)
    f.data[0] = radial_bump_field(grid, radius=radius)
    return f
