"""Scalar and matrix symbol algebra for the per-mode systems.

Families: l = 1 is the shear (solenoidal) family with kappa_1 = nu*lam + beta^2,
l = 2 the compressible family with kappa_2 = (nu+nu_tilde)*lam + beta^2 + gamma^2.
Per-mode exponents are the roots of lam^2 + kappa_l(lam)|xi|^2 = 0.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import generator_matrix_dense

DEGENERATE_TOL = 1e-8


def kappa(l, lam, params):
    return params.kappa(l, lam)


def projections(xi):
    """Helmholtz projectors (P_s, P_c) at a single wavevector xi != 0."""
    xi = np.asarray(xi, dtype=float)
    s2 = np.dot(xi, xi)
    if s2 == 0.0:
        raise ValueError("projections undefined at xi = 0; handle the zero mode separately")
    Pc = np.outer(xi, xi) / s2
    Ps = np.eye(3) - Pc
    return Ps, Pc


def dispersion_roots(l, s, params):
    """Roots of lam^2 + c_l*s^2*lam + d_l*s^2 with (c_1,d_1)=(nu,beta^2),
    (c_2,d_2)=(nu+nu_tilde, beta^2+gamma^2).

    Returns (lam_plus, lam_minus, degenerate) where degenerate flags a double
    root to relative tolerance 1e-8.
    """
    if l == 1:
        c, d = params.nu, params.beta2
    elif l == 2:
        c, d = params.visc_sum, params.beta2 + params.gamma2
    else:
        raise ValueError(f"family index must be 1 or 2, got {l}")
    s2 = np.asarray(s, dtype=float) ** 2
    disc = (c * c * s2 * s2 - 4.0 * d * s2).astype(complex)
    sq = np.sqrt(disc)
    lam_p = 0.5 * (-c * s2 + sq)
    lam_m = 0.5 * (-c * s2 - sq)
    degenerate = np.abs(lam_p - lam_m) < DEGENERATE_TOL * np.maximum(1.0, np.abs(lam_p))
    if np.isscalar(s) or np.ndim(s) == 0:
        return complex(lam_p), complex(lam_m), bool(degenerate)
    return lam_p, lam_m, degenerate


def generator_matrix(xi, params):
    """13x13 Ahat(xi) with d/dt uhat = -Ahat(xi) uhat."""
    return generator_matrix_dense(np.asarray(xi, dtype=float), params.nu,
                                  params.nu_tilde, params.beta2, params.gamma2)


# ----------------------------------------------------------------------------
# complex regions
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionSpec:
    """One of the lambda-plane regions used by the resolvent analysis.

    kind: 'sigma' (args: eps), 'sigma_shift' (eps, delta), 'xi_region' (),
    'xi_eps' (eps), 'v' (eps, lam0), 'u' (lam0), 'u_dot' (lam0).
    """
    kind: str
    eps: float = 0.0
    delta: float = 0.0
    lam0: float = 0.0


def in_region(lam, region, params):
    lam = complex(lam)
    kind = region.kind
    if kind == "sigma":
        if lam == 0:
            return False
        return abs(np.angle(lam)) <= np.pi - region.eps
    if kind == "sigma_shift":
        return in_region(lam - region.delta,
                         RegionSpec("sigma", eps=region.eps), params)
    if kind == "xi_region":
        R0 = params.R0
        return (lam.real + R0) ** 2 + lam.imag**2 > R0 * R0
    if kind == "xi_eps":
        R = params.R0 + region.eps
        return (lam.real + R) ** 2 + lam.imag**2 >= R * R
    if kind == "v":
        return (in_region(lam, RegionSpec("sigma", eps=region.eps), params)
                and in_region(lam, RegionSpec("xi_region"), params)
                and abs(lam) > region.lam0)
    if kind == "u":
        return abs(lam) < region.lam0
    if kind == "u_dot":
        return lam.real >= 0 and 0 < abs(lam) < region.lam0
    raise ValueError(f"unknown region kind {kind!r}")


def lambda1_bound(params):
    """Largest radius r with max_l sup_{|lam|<=r} |lam^2/kappa_l(lam)| <= 1/2.

    On the circle |lam| = r < root radius, the supremum is r^2/(d_l - c_l r)
    with kappa_l = c_l lam + d_l, so r solves 2 r^2 + c_l r - d_l = 0.
    """
    out = np.inf
    for c, d in ((params.nu, params.beta2),
                 (params.visc_sum, params.beta2 + params.gamma2)):
        if d == 0.0:
            return 0.0
        r = (-c + np.sqrt(c * c + 8.0 * d)) / 4.0
        out = min(out, r)
    return out


def sample_symbol_bounds(params, eps0=np.pi / 4, n_samples=10000, seed=0,
                         xi_min_high=1.0):
    """Sampled verification of the two symbol inequalities.

    (a) |lam + |xi|^2| >= sin(eps0/2) (|lam| + |xi|^2) on the sector
        |arg lam| <= pi - eps0, any xi.
    (b) |lam^2/kappa_l(lam) + |xi|^2| >= |xi|^2 / 2 for |lam| < lam1 and
        |xi| >= 1 (the inequality fails for small |xi|; it is only used under
        the high-frequency cutoff, so sampling restricts to |xi| >= xi_min_high).

    Returns a dict report with worst margins and any violation witness.
    """
    rng = np.random.default_rng(seed)
    lam1 = lambda1_bound(params)

    # (a): sector inequality
    mag = 10.0 ** rng.uniform(-3, 3, n_samples)
    ang = rng.uniform(-(np.pi - eps0), np.pi - eps0, n_samples)
    lam = mag * np.exp(1j * ang)
    s2 = (10.0 ** rng.uniform(-3, 3, n_samples)) ** 2
    lhs = np.abs(lam + s2)
    rhs = np.sin(eps0 / 2.0) * (np.abs(lam) + s2)
    margin_a = lhs - rhs
    worst_a = int(np.argmin(margin_a))

    # (b): low-lambda, high-frequency inequality
    mag = lam1 * np.sqrt(rng.uniform(0.0, 1.0, n_samples))
    ang = rng.uniform(-np.pi, np.pi, n_samples)
    lamb = mag * np.exp(1j * ang)
    s2b = (10.0 ** rng.uniform(np.log10(xi_min_high), 2, n_samples)) ** 2
    margin_b = np.full(n_samples, np.inf)
    for l in (1, 2):
        kap = params.kappa(l, lamb)
        z = lamb * lamb / kap
        margin_b = np.minimum(margin_b, np.abs(z + s2b) - 0.5 * s2b)
    worst_b = int(np.argmin(margin_b))

    report = {
        "eps0": eps0,
        "lambda1": lam1,
        "n_samples": n_samples,
        "seed": seed,
        "sector": {
            "worst_margin": float(margin_a[worst_a]),
            "witness": (complex(lam[worst_a]), float(s2[worst_a])),
            "violations": int(np.sum(margin_a < -1e-13)),
        },
        "high_freq": {
            "worst_margin": float(margin_b[worst_b]),
            "witness": (complex(lamb[worst_b]), float(s2b[worst_b])),
            "violations": int(np.sum(margin_b < -1e-13)),
        },
    }
    report["ok"] = (report["sector"]["violations"] == 0
                    and report["high_freq"]["violations"] == 0)
    return report


def format_symbol_report(report):
    lines = [
        f"symbol bound sampling: n={report['n_samples']} seed={report['seed']} "
        f"eps0={report['eps0']:.4f} lambda1={report['lambda1']:.6f}",
        f"  sector bound   : worst margin {report['sector']['worst_margin']:+.3e} "
        f"violations {report['sector']['violations']}",
        f"  high-freq bound: worst margin {report['high_freq']['worst_margin']:+.3e} "
        f"violations {report['high_freq']['violations']}",
        f"  result: {'OK' if report['ok'] else 'VIOLATED'}",
    ]
    return "\n".join(lines)
