import numpy as np
import pytest
from scipy.integrate import solve_ivp

from vwaves import PeriodicGrid, PhysicalParams, apply_A_spectral, constraint_residual
from vwaves.grid import State, SpectralState
from vwaves.model import radial_bump_field
from vwaves.spectral import (CutoffPair, SingularResolventError,
                             dispersion_root_margin, propagate,
                             propagate_series, rbar_norms, resolvent_apply,
                             resolvent_derivative, spatial_decay_probe,
                             split_low_high, zero_resolvent_apply)
from vwaves.symbols import generator_matrix

from helpers import admissible_data, inadmissible_data

P = PhysicalParams(nu=1.0, nu_prime=0.0, beta=1.0, gamma=1.0)


def resolvent_residual(lam, f, u, params):
    Au = apply_A_spectral(u, params)
    num = np.sqrt(np.sum(np.abs(lam * u.data + Au.data - f.data) ** 2))
    den = np.sqrt(np.sum(np.abs(f.data) ** 2))
    return num / den


def test_resolvent_zero_input():
    g = PeriodicGrid(16, 4.0)
    u = resolvent_apply(1.0, State(g), P)
    assert np.all(u.data == 0.0)


def test_resolvent_residual_oracle():
    g = PeriodicGrid(32, 8.0)
    f = admissible_data(g, P, seed=1)
    for lam in (1.0, 1j, 0.01 + 0.1j):
        u = resolvent_apply(lam, f, P)
        assert resolvent_residual(lam, f, u, P) <= 1e-10


def test_resolvent_single_mode_matches_dense_solve():
    g = PeriodicGrid(16, 4.0)
    k0 = np.pi / g.L
    xi = np.array([k0 * 2, -k0, k0 * 3])
    rng = np.random.default_rng(4)
    coef = rng.normal(size=13) + 1j * rng.normal(size=13)
    x, y, z = g.x_mesh()
    phase = np.exp(1j * (xi[0] * x + xi[1] * y + xi[2] * z))
    f = State(g, np.real(coef[:, None, None, None] * phase))
    lam = 0.7 + 0.3j
    # single-mode data is not admissible, so the exact inverse needs the
    # R-bar corrections included
    u = resolvent_apply(lam, f, P, include_rbar=True)
    # dense 13x13 oracle per +-xi mode pair
    A = generator_matrix(xi, P)
    c_sol = np.linalg.solve(lam * np.eye(13) + A, coef)
    A2 = generator_matrix(-xi, P)
    c_sol2 = np.linalg.solve(lam * np.eye(13) + A2, np.conj(coef))
    expect = 0.5 * (c_sol[:, None, None, None] * phase
                    + c_sol2[:, None, None, None] * np.conj(phase))
    assert np.abs(u.data - expect).max() <= 1e-11 * np.abs(expect).max()


def test_resolvent_guard_near_dispersion_root():
    g = PeriodicGrid(16, 4.0)
    f = admissible_data(g, P, seed=2, radius=1.0)
    s = np.sqrt(np.unique(g.xi_sq)[1])
    from vwaves.symbols import dispersion_roots
    root = dispersion_roots(1, s, P)[0]
    assert dispersion_root_margin(root, g, P) < 1e-12
    with pytest.raises(SingularResolventError):
        resolvent_apply(root, f, P)
    with pytest.raises(SingularResolventError):
        resolvent_apply(0.0, f, P)


def test_rbar_vanishing_and_detection():
    g = PeriodicGrid(32, 8.0)
    f = admissible_data(g, P, seed=3)
    r1, r3 = rbar_norms(1.0, f, P)
    assert r1 + r3 <= 1e-10 * f.norm2()
    bad = inadmissible_data(g)
    b1, b3 = rbar_norms(1.0, bad, P)
    assert b1 > 1e-3 * bad.norm2()
    zero = State(g)
    z1, z3 = rbar_norms(1.0, zero, P)
    assert z1 == 0.0 and z3 == 0.0


def test_zero_resolvent_identities():
    g = PeriodicGrid(32, 8.0)
    f = admissible_data(g, P, seed=5)
    u, psi = zero_resolvent_apply(f, P)
    # residual on nonzero modes
    dh = np.fft.rfftn(apply_A_spectral(u, P).data - f.data, axes=(1, 2, 3))
    dh[:, 0, 0, 0] = 0.0
    den = np.sqrt(np.sum(np.abs(np.fft.rfftn(f.data, axes=(1, 2, 3))) ** 2))
    assert np.sqrt(np.sum(np.abs(dh) ** 2)) / den <= 1e-10
    # G equals grad(psi)
    psihat = np.fft.rfftn(psi, axes=(1, 2, 3))
    xi = (g.xi1, g.xi2, g.xi3)
    n = g.n
    for j in range(3):
        for k in range(3):
            Gjk = np.fft.irfftn(1j * xi[k] * psihat[j], s=(n, n, n),
                                axes=(0, 1, 2))
            assert np.abs(Gjk - u.G[j, k]).max() <= 1e-12 * max(1.0, np.abs(u.G).max())


def test_zero_resolvent_rejections():
    g = PeriodicGrid(16, 4.0)
    zero_in = State(g)
    u, psi = zero_resolvent_apply(zero_in, P)
    assert np.all(u.data == 0.0) and np.all(psi == 0.0)
    bad = State(g)
    bad.data[1] = radial_bump_field(g, radius=1.0)  # nonzero mean
    with pytest.raises(ValueError, match="zero mean"):
        zero_resolvent_apply(bad, P)
    with pytest.raises(ValueError, match="beta"):
        zero_resolvent_apply(zero_in, PhysicalParams(nu=1.0, beta=0.0))


def test_propagate_identity_and_zero_mode():
    g = PeriodicGrid(16, 4.0)
    f = admissible_data(g, P, seed=6, radius=1.0)
    f.data[1] += 0.3  # nonzero mean in w
    u0 = propagate(0.0, f, P)
    assert np.array_equal(u0.data, f.data)
    u = propagate(1.3, f, P)
    # zero mode constant in t
    for c in range(13):
        assert u.data[c].mean() == pytest.approx(f.data[c].mean(), abs=1e-13)
    with pytest.raises(ValueError):
        propagate(-1.0, f, P)


def test_propagate_matches_ode_oracle_per_mode():
    """Random mode at t=0.7 vs high-accuracy adaptive ODE integration."""
    rng = np.random.default_rng(8)
    for _ in range(3):
        xi = rng.normal(size=3) * 2.0
        A = generator_matrix(xi, P)
        v0 = rng.normal(size=13) + 1j * rng.normal(size=13)

        def rhs(t, y):
            v = y[:13] + 1j * y[13:]
            dv = -A @ v
            return np.concatenate([dv.real, dv.imag])

        sol = solve_ivp(rhs, (0.0, 0.7), np.concatenate([v0.real, v0.imag]),
                        rtol=1e-11, atol=1e-13, method="DOP853")
        vT = sol.y[:13, -1] + 1j * sol.y[13:, -1]
        from vwaves._kernels import advance_modes
        m = v0.reshape(1, 13).copy()
        advance_modes(m, xi.reshape(1, 3), 0.7, P.nu, P.nu_tilde, P.beta2, P.gamma2)
        assert np.abs(m[0] - vT).max() <= 1e-8 * max(1.0, np.abs(vT).max())


def test_semigroup_property_and_constraint_conservation():
    g = PeriodicGrid(24, 6.0)
    u0 = admissible_data(g, P, seed=9, radius=1.5)
    ut = propagate(0.9, u0, P)
    u_st = propagate(0.4, propagate(0.5, u0, P), P)
    assert (u_st - ut).norm2() <= 1e-9 * u0.norm2()
    assert constraint_residual(ut) <= 1e-10


def test_propagate_series_matches_single_shot():
    g = PeriodicGrid(16, 4.0)
    u0 = admissible_data(g, P, seed=10, radius=1.0)
    seen = {}
    propagate_series(u0, [0.0, 0.5, 1.0], P,
                     lambda t, s: seen.__setitem__(t, s))
    direct = propagate(1.0, u0, P)
    assert (seen[1.0] - direct).norm2() <= 1e-9 * u0.norm2()
    assert (seen[0.0] - u0).norm2() <= 1e-13 * u0.norm2()  # fft roundtrip


def test_resolvent_laplace_consistency():
    """R(2) u0 equals the Laplace transform of the semigroup (composite
    Gauss-Legendre panels over [0, T], tail below e^{-lam T/2})."""
    g = PeriodicGrid(16, 8.0)
    u0 = admissible_data(g, P, seed=12, radius=1.5)
    lam, T = 2.0, 20.0
    nodes_ref, wts_ref = np.polynomial.legendre.leggauss(16)
    ts, wts = [], []
    for lo in np.arange(0.0, T, 1.0):
        ts.append(lo + 0.5 * (nodes_ref + 1.0))
        wts.append(0.5 * wts_ref)
    ts = np.concatenate(ts)
    wts = np.concatenate(wts)
    order = np.argsort(ts)
    ts, wts = ts[order], wts[order]
    acc = np.zeros_like(u0.data)
    wmap = dict(zip(ts.tolist(), wts.tolist()))
    propagate_series(
        u0, ts, P,
        lambda t, s: acc.__iadd__(np.exp(-lam * t) * wmap[t] * s.data))
    R = resolvent_apply(lam, u0, P)
    err = np.sqrt(np.sum((acc - R.data) ** 2)) / np.sqrt(np.sum(u0.data ** 2))
    assert err <= np.exp(-lam * T * 0.5)


def test_split_low_high():
    g = PeriodicGrid(16, 4.0)
    u0 = admissible_data(g, P, seed=13, radius=1.0)
    shat = u0.fft()
    cut = CutoffPair(scale=2.0)
    low, high = split_low_high(shat, cut)
    scale = np.abs(shat.data).max()
    assert np.abs(low.data + high.data - shat.data).max() <= 1e-15 * scale
    # low part supported in |xi| <= 2*scale
    s = np.sqrt(g.xi_sq)
    assert np.abs(low.data[:, s > 2 * cut.scale + 1e-12]).max() == 0.0
    # a state with only low modes passes through unchanged
    only_low = SpectralState(g, shat.data * (s < cut.scale))
    lo2, hi2 = split_low_high(only_low, cut)
    assert np.abs(hi2.data).max() == 0.0
    # profile weight at |xi| = 1.5 scale
    from vwaves.lowfreq import cutoff_phi0
    w = cutoff_phi0(1.5)
    mask = np.isclose(s / cut.scale, 1.5)
    if mask.any():
        np.testing.assert_allclose(low.data[:, mask], shat.data[:, mask] * w,
                                   rtol=1e-12)


def test_spatial_decay_probe_synthetic():
    g = PeriodicGrid(32, 8.0)
    r = g.radius()
    field = 1.0 / np.maximum(r, g.h / 2) ** 2
    rows = spatial_decay_probe(field, g, R=1.0, shells=[2.0, 3.0, 4.0, 5.0])
    vals = [row["max_rk2"] for row in rows]
    # |x|^2 * |x|^-2 = 1 on shell maxima, up to lattice discreteness
    for v in vals:
        assert v == pytest.approx(1.0, rel=0.05)
    zero_rows = spatial_decay_probe(np.zeros(g.shape), g, R=1.0, shells=[2.0, 4.0])
    assert zero_rows[0]["max_rk2"] == 0.0
    # unsafe flag beyond 0.8 L
    rows2 = spatial_decay_probe(field, g, R=1.0, shells=[5.0, 7.5])
    assert rows2[0]["unsafe"]


def test_zero_resolvent_spatial_decay():
    """|x|^2 R(0)f and |x| Psi(0)f bounded across shells (desk scale)."""
    g = PeriodicGrid(48, 16.0)
    f = admissible_data(g, P, seed=14, radius=2.0)
    u, psi = zero_resolvent_apply(f, P)
    shells = np.linspace(4.0, 8.0, 5)
    rows_u = spatial_decay_probe(u.data, g, R=2.0, shells=shells)
    vals_u = [row["max_rk2"] for row in rows_u]
    assert vals_u[-1] <= 1.5 * vals_u[0]
    rows_p = spatial_decay_probe(psi, g, R=2.0, shells=shells)
    vals_p = [row["max_rk1"] for row in rows_p]
    assert vals_p[-1] <= 1.5 * vals_p[0]


def test_resolvent_derivative_identity():
    """d/dlam R(lam) f = -R(lam)^2 f."""
    g = PeriodicGrid(24, 6.0)
    f = admissible_data(g, P, seed=15, radius=1.5)
    lam = 1.0
    d1 = resolvent_derivative(lam, f, P, order=1, step=1e-3)
    rr = resolvent_apply(lam, resolvent_apply(lam, f, P), P)
    rel = (d1 + rr).norm2() / rr.norm2()
    assert rel <= 1e-6
    d0 = resolvent_derivative(lam, f, P, order=0)
    assert (d0 - resolvent_apply(lam, f, P)).norm2() == 0.0
