"""Field construction, constraint checks, direct operator application, norms.

Admissible data means G = grad(psi) for some displacement potential psi
together with grad(phi) + div(G^T) = 0; constructing G spectrally from psi and
setting phi = -tr(G) enforces both identities per mode.
"""

from dataclasses import dataclass

import numpy as np

from .grid import State, SpectralState

__all__ = [
    "NormReport", "smooth_bump", "radial_bump_field", "shell_bump",
    "make_admissible_data", "constraint_residual", "apply_A_spectral",
    "apply_A_hat", "energy", "gradient_energy_rate", "local_norm",
]


def smooth_bump(r, radius=1.0):
    """C-infinity bump exp(1 - 1/(1-(r/radius)^2)) on r < radius, else 0."""
    q = np.asarray(r, dtype=float) / radius
    out = np.zeros_like(q)
    inside = q < 1.0
    qi = q[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - qi * qi))
    return out


def radial_bump_field(grid, radius=1.0, amplitude=1.0, center=(0.0, 0.0, 0.0)):
    x, y, z = grid.x_mesh()
    r = np.sqrt((x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2)
    return amplitude * smooth_bump(r, radius)


def dipole_bump_field(grid, radius=1.0, amplitude=1.0, axis=0, separation=None):
    """Difference of two axis-shifted bumps; exactly zero lattice mean and
    compactly supported (shift snapped to whole cells)."""
    if separation is None:
        separation = radius
    shift = max(1, int(round(separation / grid.h)))
    off = shift * grid.h
    c_plus = [0.0, 0.0, 0.0]
    c_minus = [0.0, 0.0, 0.0]
    c_plus[axis] = off
    c_minus[axis] = -off
    return (radial_bump_field(grid, radius, amplitude, center=c_plus)
            - radial_bump_field(grid, radius, amplitude, center=c_minus))


def shell_bump(grid, r_inner, r_outer, amplitude=1.0):
    """Radial bump supported on the shell r_inner < |x| < r_outer."""
    r = grid.radius()
    mid = 0.5 * (r_inner + r_outer)
    half = 0.5 * (r_outer - r_inner)
    return amplitude * smooth_bump(r - mid, half)


def _check_support(field, grid, name):
    r = grid.radius()
    total = np.sum(np.abs(field))
    if total == 0.0:
        return
    flat = np.abs(field).reshape(-1, *grid.shape)
    outside = np.sum(flat[:, r > grid.L / 2.0])
    if outside > 1e-12 * total:
        raise ValueError(
            f"{name} has {outside/total:.2e} of its mass beyond |x| = L/2; "
            "compact support emulation on the periodic box is violated")


def make_admissible_data(psi_profile, w_profile, grid, params=None,
                         check_support=True):
    """Build an admissible State from a displacement potential and a velocity.

    psi_profile, w_profile: arrays of shape (3, n, n, n) (or None for zero).
    G = grad(psi) is computed spectrally and phi = -tr(G), which makes the
    linearized constraint hold mode by mode.
    """
    state = State(grid)
    if w_profile is not None:
        w = np.asarray(w_profile, dtype=float)
        if check_support:
            _check_support(w, grid, "w_profile")
        state.data[1:4] = w
    if psi_profile is not None:
        psi = np.asarray(psi_profile, dtype=float)
        if check_support:
            _check_support(psi, grid, "psi_profile")
        psi_hat = np.fft.rfftn(psi, axes=(1, 2, 3))
        xi = (grid.xi1, grid.xi2, grid.xi3)
        n = grid.n
        for j in range(3):
            for k in range(3):
                Gjk = np.fft.irfftn(1j * xi[k] * psi_hat[j], s=(n, n, n), axes=(0, 1, 2))
                state.data[4 + 3 * j + k] = Gjk
        state.data[0] = -(state.data[4] + state.data[8] + state.data[12])
    return state


def constraint_residual(state):
    """|| grad(phi) + div(G^T) ||_2 / max(1, ||(phi, G)||_2), spectral derivatives."""
    grid = state.grid
    xi = (grid.xi1, grid.xi2, grid.xi3)
    phi_hat = np.fft.rfftn(state.data[0])
    G_hat = np.fft.rfftn(state.data[4:13], axes=(1, 2, 3))
    res_sq = 0.0
    for j in range(3):
        # (div G^T)_j = sum_k d_k G[k, j]
        rj = 1j * xi[j] * phi_hat
        for k in range(3):
            rj = rj + 1j * xi[k] * G_hat[3 * k + j]
        n = grid.n
        res_sq += np.sum(np.fft.irfftn(rj, s=(n, n, n), axes=(0, 1, 2)) ** 2)
    res = np.sqrt(res_sq * grid.cell_volume)
    ref_sq = np.sum(state.data[0] ** 2) + np.sum(state.data[4:13] ** 2)
    ref = np.sqrt(ref_sq * grid.cell_volume)
    return res / max(1.0, ref)


def apply_A_hat(fhat, tables, params):
    """Per-mode application of Ahat to a 13-lane spectrum array."""
    xi = tables.xi
    s2 = tables.xi_sq
    nu, nut = params.nu, params.nu_tilde
    b2, g2 = params.beta2, params.gamma2
    out = np.empty_like(fhat)
    w = fhat[1:4]
    divw_hat = xi[0] * w[0] + xi[1] * w[1] + xi[2] * w[2]
    # phi row: i xi . w
    out[0] = 1j * divw_hat
    for j in range(3):
        Gxi = (xi[0] * fhat[4 + 3 * j + 0]
               + xi[1] * fhat[4 + 3 * j + 1]
               + xi[2] * fhat[4 + 3 * j + 2])
        out[1 + j] = (nu * s2 * w[j] + nut * xi[j] * divw_hat
                      + 1j * g2 * xi[j] * fhat[0] - 1j * b2 * Gxi)
        for k in range(3):
            out[4 + 3 * j + k] = -1j * w[j] * xi[k]
    return out


def apply_A_spectral(state, params):
    """A u with spectral derivatives: (div w, -nu*Lap w - nut*grad div w
    + gamma^2 grad phi - beta^2 div G, -grad w)."""
    grid = state.grid
    if state.is_complex:
        from .grid import state_from_full_spectrum
        out = apply_A_hat(state.fftn_full(), grid.tables(half=False), params)
        return state_from_full_spectrum(grid, out, real_if_close=False)
    out = apply_A_hat(state.fft().data, grid.tables(half=True), params)
    return SpectralState(grid, out).ifft()


def energy(state, params):
    """Quadratic energy 0.5*(gamma^2 ||phi||^2 + ||w||^2 + beta^2 ||G||^2)."""
    dv = state.grid.cell_volume
    e = (params.gamma2 * np.sum(np.abs(state.data[0]) ** 2)
         + np.sum(np.abs(state.data[1:4]) ** 2)
         + params.beta2 * np.sum(np.abs(state.data[4:13]) ** 2))
    return 0.5 * e * dv


def local_energy(state, params, b):
    """Energy restricted to the ball |x| <= b."""
    mask = state.grid.radius() <= b
    dv = state.grid.cell_volume
    e = (params.gamma2 * np.sum(np.abs(state.data[0][mask]) ** 2)
         + np.sum(np.abs(state.data[1:4][:, mask]) ** 2)
         + params.beta2 * np.sum(np.abs(state.data[4:13][:, mask]) ** 2))
    return 0.5 * e * dv


def gradient_energy_rate(state, params):
    """nu*||grad w||^2 + nu_tilde*||div w||^2 (the energy dissipation rate)."""
    grid = state.grid
    xi = (grid.xi1, grid.xi2, grid.xi3)
    n = grid.n
    w_hat = np.fft.rfftn(state.data[1:4], axes=(1, 2, 3))
    grad_sq = 0.0
    for j in range(3):
        for k in range(3):
            d = np.fft.irfftn(1j * xi[k] * w_hat[j], s=(n, n, n), axes=(0, 1, 2))
            grad_sq += np.sum(d ** 2)
    divw = np.fft.irfftn(
        1j * (xi[0] * w_hat[0] + xi[1] * w_hat[1] + xi[2] * w_hat[2]),
        s=(n, n, n), axes=(0, 1, 2))
    div_sq = np.sum(divw ** 2)
    dv = grid.cell_volume
    return params.nu * grad_sq * dv + params.nu_tilde * div_sq * dv


@dataclass
class NormReport:
    region: str
    p_norms: dict  # component -> {p: value}

    def get(self, component, p):
        return self.p_norms[component][p]


def local_norm(state, b=None, p_values=(1, 2, np.inf)):
    """l^p norms of phi, w, G over |x| <= b (b=None: full box)."""
    grid = state.grid
    if b is not None:
        if b > grid.L:
            raise ValueError(f"radius b={b} exceeds box half-width L={grid.L}")
        mask = grid.radius() <= b
        region = f"ball(b={b})"
    else:
        mask = np.ones(grid.shape, dtype=bool)
        region = "full"
    dv = grid.cell_volume
    comps = {"phi": state.data[0:1], "w": state.data[1:4], "G": state.data[4:13]}
    report = {}
    for name, block in comps.items():
        vals = {}
        flat = np.abs(block[:, mask])
        for p in p_values:
            if np.isinf(p):
                vals[p] = flat.max() if flat.size else 0.0
            else:
                vals[p] = (np.sum(flat ** p) * dv) ** (1.0 / p)
        report[name] = vals
    return NormReport(region=region, p_norms=report)
