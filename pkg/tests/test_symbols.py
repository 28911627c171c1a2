import numpy as np
import pytest

from vwaves import PhysicalParams
from vwaves.symbols import (RegionSpec, dispersion_roots, format_symbol_report,
                            generator_matrix, in_region, kappa, lambda1_bound,
                            projections, sample_symbol_bounds)

P = PhysicalParams(nu=1.0, nu_prime=0.0, beta=1.0, gamma=1.0)


def test_kappa_values():
    p = PhysicalParams(nu=1.0, beta=2.0)
    assert kappa(1, p.beta * 0.0, p) == pytest.approx(4.0)
    assert kappa(2, 1j, P) == pytest.approx(2.0 + 2.0j)
    # kappa_1 root at -beta^2/nu
    p2 = PhysicalParams(nu=0.5, beta=1.5)
    assert abs(kappa(1, -p2.beta2 / p2.nu, p2)) < 1e-14


def test_projections_axis_case():
    Ps, Pc = projections(np.array([1.0, 0.0, 0.0]))
    assert np.allclose(Ps, np.diag([0.0, 1.0, 1.0]), atol=1e-15)
    Ps2, Pc2 = projections(np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0))
    expect = 0.5 * np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0.0]])
    assert np.allclose(Pc2, expect, atol=1e-14)


def test_projection_properties_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        xi = rng.normal(size=3)
        Ps, Pc = projections(xi)
        assert np.allclose(Ps + Pc, np.eye(3), atol=1e-13)
        assert np.allclose(Ps @ Ps, Ps, atol=1e-13)
        assert np.allclose(Pc @ Pc, Pc, atol=1e-13)
        assert np.allclose(Ps @ xi, 0.0, atol=1e-13 * np.linalg.norm(xi))
        assert np.allclose(Ps @ Pc, 0.0, atol=1e-13)
    with pytest.raises(ValueError):
        projections(np.zeros(3))


def test_dispersion_roots_cases():
    # perfect square: nu=1, beta=1, s=2 -> (lam+2)^2
    lp, lm, deg = dispersion_roots(1, 2.0, P)
    assert deg
    assert lp == pytest.approx(-2.0, abs=1e-9)
    # small s oscillatory roots (polynomial-root oracle frozen)
    lp, lm, deg = dispersion_roots(1, 0.2, P)
    assert not deg
    assert lp == pytest.approx(-0.02 + 0.19899748742132398j, abs=1e-12)
    # s = 0: double zero root
    lp, lm, deg = dispersion_roots(2, 0.0, P)
    assert lp == 0.0 and lm == 0.0 and deg


def test_dispersion_roots_satisfy_polynomial():
    rng = np.random.default_rng(1)
    for _ in range(100):
        s = 10.0 ** rng.uniform(-2, 1)
        for l in (1, 2):
            for lam in dispersion_roots(l, s, P)[:2]:
                val = lam * lam + P.kappa(l, lam) * s * s
                scale = max(1.0, abs(lam) ** 2)
                assert abs(val) <= 1e-12 * scale


def test_root_asymptotics_small_s():
    """lam = -c_l s^2/2 +- i s sqrt(d_l) + O(s^3)."""
    for l, c, d in ((1, P.nu, P.beta2), (2, P.visc_sum, P.beta2 + P.gamma2)):
        errs = []
        for s in (1e-2, 1e-3):
            lp = dispersion_roots(l, s, P)[0]
            approx = -0.5 * c * s * s + 1j * s * np.sqrt(d)
            errs.append(abs(lp - approx))
        order = np.log(errs[0] / errs[1]) / np.log(10.0)
        assert order >= 2.9


def test_generator_matrix_entries():
    assert np.allclose(generator_matrix(np.zeros(3), P), 0.0)
    A = generator_matrix(np.array([1.0, 0.0, 0.0]), P)
    assert A[1, 0] == pytest.approx(1j * P.gamma2)  # phi -> w row 1
    assert A[0, 1] == pytest.approx(1j)             # w1 -> phi row
    assert A[0, 2] == 0.0


def _match_eigen_multiset(xi, tol):
    s = np.linalg.norm(xi)
    ev = list(np.linalg.eigvals(-generator_matrix(xi, P)))
    expected = [0.0] * 7
    l1 = dispersion_roots(1, s, P)[:2]
    l2 = dispersion_roots(2, s, P)[:2]
    expected += [l1[0], l1[0], l1[1], l1[1], l2[0], l2[1]]
    scale = max(1.0, max(abs(complex(b)) for b in expected))
    for b in expected:  # greedy multiset matching
        j = int(np.argmin([abs(a - complex(b)) for a in ev]))
        assert abs(ev[j] - complex(b)) <= tol * scale, (xi, ev[j], b)
        ev.pop(j)
    assert not ev


def test_generator_eigenvalues_match_dispersion_roots():
    """Nonzero spectrum of -Ahat: shear roots twice, compressible once, 7 zeros."""
    rng = np.random.default_rng(2)
    for _ in range(6):
        _match_eigen_multiset(rng.normal(size=3), 1e-9)


def test_generator_eigenvalues_degenerate_axis_case():
    # s=2 makes the shear family a double root (defective); dense eigensolvers
    # only resolve it to sqrt(eps)
    _match_eigen_multiset(np.array([2.0, 0.0, 0.0]), 2e-7)


def test_in_region():
    assert in_region(1.0, RegionSpec("xi_region"), P)
    assert not in_region(0.0, RegionSpec("xi_region"), P)
    # |arg(-1)| = pi > pi - eps
    assert not in_region(-1.0, RegionSpec("sigma", eps=np.pi / 4), P)
    assert in_region(-1.0 + 0.0j, RegionSpec("sigma", eps=0.0), P)
    assert not in_region(0.0, RegionSpec("sigma", eps=0.1), P)
    assert in_region(0.5j, RegionSpec("u_dot", lam0=1.0), P)
    assert not in_region(-0.1 + 0.5j, RegionSpec("u_dot", lam0=1.0), P)
    assert in_region(2.0, RegionSpec("v", eps=0.3, lam0=1.0), P)
    assert not in_region(0.5, RegionSpec("v", eps=0.3, lam0=1.0), P)
    assert in_region(1.0 + 1.0j, RegionSpec("sigma_shift", eps=0.3, delta=0.5), P)


def test_lambda1_bound():
    """Largest disk with |lam^2/kappa_l| <= 1/2: roots of 2r^2 + c r - d."""
    lam1 = lambda1_bound(P)
    assert lam1 == pytest.approx(0.5, abs=1e-12)  # shear family binds
    for ang in np.linspace(-np.pi, np.pi, 17):
        lam = lam1 * np.exp(1j * ang) * 0.999
        assert max(abs(lam**2 / P.kappa(1, lam)), abs(lam**2 / P.kappa(2, lam))) <= 0.5 + 1e-9


def test_sector_bound_cases():
    # positive reals: equality chain
    eps0 = np.pi / 2
    lam, s2 = 1j, 1.0
    lhs = abs(lam + s2)
    rhs = np.sin(eps0 / 2) * (abs(lam) + s2)
    assert lhs == pytest.approx(rhs, rel=1e-14)  # margin exactly zero


def test_sample_symbol_bounds_clean():
    rep = sample_symbol_bounds(P, eps0=np.pi / 4, n_samples=100000, seed=123)
    assert rep["ok"], format_symbol_report(rep)
    assert rep["sector"]["violations"] == 0
    assert rep["high_freq"]["violations"] == 0
    txt = format_symbol_report(rep)
    assert "OK" in txt
