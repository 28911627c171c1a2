"""Low-frequency singular expansions and the beta=0 / beta>0 classifier.

The radial frequency cutoff phi0 equals 1 on r <= 1, 0 on r >= 2, with the
exp(-1/t)-based smoothstep in between.  For z off the negative real axis the
model integrals

    int_0^2 phi0(r) r^k / (z + r^2) dr

split into an explicit singular term (z^{N+1/2} for even k = 2N+2, resp.
(-z)^{N+1} log z for odd k = 2N+3) plus a remainder h_k(z) holomorphic near 0;
both sides are evaluated here by independent routes and compared.

Principal branches throughout: arg z in (-pi, pi].
"""

from math import comb

import numpy as np
from scipy.integrate import quad

__all__ = [
    "cutoff_phi0", "lhs_integral", "singular_part", "h_remainder",
    "verify_identity", "identity_table", "holomorphy_residual",
    "classify_singularity",
]


def _q(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def cutoff_phi0(r):
    """Smooth radial cutoff: 1 on r <= 1, 0 on r >= 2, monotone in between."""
    r = np.asarray(r, dtype=float)
    num = _q(2.0 - r)
    den = _q(r - 1.0) + num
    with np.errstate(invalid="ignore"):
        mid = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    out = np.where(r <= 1.0, 1.0, np.where(r >= 2.0, 0.0, mid))
    if out.ndim == 0:
        return float(out)
    return out


def _quad_complex(fn, a, b, epsabs=1e-12, limit=200):
    val, err = quad(fn, a, b, epsabs=epsabs, epsrel=1e-12, limit=limit,
                    complex_func=True)
    if abs(err) > 1e-9:
        raise RuntimeError(f"quadrature did not converge: err={err:.2e}")
    return val


def lhs_integral(k, z):
    """int_0^2 phi0(r) r^k / (z + r^2) dr by adaptive quadrature.

    Subdivided at the r = 1 kink of phi0; valid for z off (-inf, 0].
    """
    if k < 0:
        raise ValueError("power k must be >= 0")
    z = complex(z)
    if z.imag == 0 and z.real <= 0:
        raise ValueError("z on the branch cut (-inf, 0]")

    def f_inner(r):
        return r**k / (z + r * r)

    def f_outer(r):
        return cutoff_phi0(r) * r**k / (z + r * r)

    return _quad_complex(f_inner, 0.0, 1.0) + _quad_complex(f_outer, 1.0, 2.0)


def singular_part(N, parity, z):
    """Leading singular term: (pi/2)(-1)^{N+1} z^{N+1/2} (even),
    -(1/2)(-z)^{N+1} log z (odd); principal branches."""
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    if parity == "even":
        if N < -1:
            raise ValueError("even family needs N >= -1")
        return (np.pi / 2.0) * (-1.0) ** (N + 1) * z ** (N + 0.5)
    if parity == "odd":
        if N < -1:
            raise ValueError("odd family needs N >= -1")
        return -0.5 * (-z) ** (N + 1) * np.log(z)
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def _tail_integral(z):
    """int_{|r| >= 1} dr / (z + r^2) = 2 (pi/2 - arctan(1/sqrt(z))) / sqrt(z)."""
    sq = np.sqrt(complex(z))
    return 2.0 * (np.pi / 2.0 - np.arctan(1.0 / sq)) / sq


def _poly_int_r(z, m):
    """int_0^1 (z + r^2)^m dr (exact binomial expansion)."""
    return sum(comb(m, j) * z ** (m - j) / (2 * j + 1) for j in range(m + 1))


def _poly_int_s(z, m):
    """int_0^1 (z + s)^m ds = ((z+1)^{m+1} - z^{m+1}) / (m+1)."""
    return ((z + 1.0) ** (m + 1) - z ** (m + 1)) / (m + 1)


def h_remainder(k, z):
    """The holomorphic remainder h_k(z), |z| < 1/2, z off (-inf, 0].

    Index convention matches the expansion of int_0^2 phi0(r) r^{k+1} ... :
    h_{2N} pairs with even powers r^{2N+2}, h_{2N+1} with odd powers r^{2N+3},
    down to h_{-2} and h_{-1}.
    """
    z = complex(z)
    if abs(z) >= 0.5:
        raise ValueError("h_k defined for |z| < 1/2")
    if z.imag == 0 and z.real <= 0 and z != 0:
        raise ValueError("z on the branch cut (-inf, 0]")

    def outer(power):
        return _quad_complex(lambda r: cutoff_phi0(r) * r**power / (z + r * r),
                             1.0, 2.0)

    if k == -2:
        return outer(0) - 0.5 * _tail_integral(z)
    if k == -1:
        return outer(1) + 0.5 * np.log(1.0 + z)
    if k < -2:
        raise ValueError("index k must be >= -2")
    N, rem = divmod(k, 2)
    if rem == 0:  # h_{2N}, N >= 0
        val = outer(2 * N + 2) - 0.5 * (-z) ** (N + 1) * _tail_integral(z)
        for l in range(1, N + 2):
            val += comb(N + 1, l) * (-z) ** (N + 1 - l) * _poly_int_r(z, l - 1)
        return val
    # h_{2N+1}, N >= 0; the substitution s = r^2 brings a factor 1/2 onto the
    # binomial sum
    val = outer(2 * N + 3) + 0.5 * (-z) ** (N + 1) * np.log(1.0 + z)
    for l in range(1, N + 2):
        val += 0.5 * comb(N + 1, l) * (-z) ** (N + 1 - l) * _poly_int_s(z, l - 1)
    return val


def verify_identity(N, parity, z):
    """|lhs_integral - (singular_part + h_remainder)| for one (N, parity, z)."""
    if parity == "even":
        k_pow = 2 * N + 2
        h_idx = 2 * N
    else:
        k_pow = 2 * N + 3
        h_idx = 2 * N + 1
    lhs = lhs_integral(k_pow, z)
    rhs = singular_part(N, parity, z) + h_remainder(h_idx, z)
    return abs(lhs - rhs)


def identity_table(N_values=(-1, 0, 1, 2), z_points=None):
    """Residual table over the (N, parity, z) verification grid."""
    if z_points is None:
        z_points = default_z_grid()
    rows = []
    for N in N_values:
        for parity in ("even", "odd"):
            for z in z_points:
                rows.append({"N": N, "parity": parity, "z": complex(z),
                             "residual": verify_identity(N, parity, z)})
    return rows


def default_z_grid(n_mag=4, count=12):
    """12 points in the punctured half-disk Re z >= 0, 0 < |z| < 1/2."""
    mags = np.geomspace(2e-3, 0.4, n_mag)
    angs = [-0.45 * np.pi, 0.0, 0.45 * np.pi]
    pts = [m * np.exp(1j * a) for m in mags for a in angs]
    return pts[:count]


def holomorphy_residual(k, z, eps=1e-5):
    """Cauchy-Riemann check: difference of real-step and imaginary-step
    difference quotients of h_k at z."""
    d_re = (h_remainder(k, z + eps) - h_remainder(k, z - eps)) / (2.0 * eps)
    d_im = (h_remainder(k, z + 1j * eps) - h_remainder(k, z - 1j * eps)) / (2.0j * eps)
    return abs(d_re - d_im)


def classify_singularity(params, f, lam_ladder=None, ball=None):
    """Classify the lam -> 0 resolvent singularity from a real-lambda ladder.

    Fits the log-log slope of the energy-weighted local norm of
    d^2/dlam^2 R(lam) f.  Slope near 0 (up to log corrections) is the
    elastic log-type singularity (beta > 0); slope near -3/2 is the
    sqrt-type heat singularity (beta = 0).

    Returns dict with 'kind' in {'LogType', 'SqrtType'}, 'slope', 'values'.
    """
    from .spectral import resolvent_derivative  # local import, avoids cycle

    if f.norm2() == 0:
        raise ValueError("zero data cannot be classified")
    grid = f.grid
    if lam_ladder is None:
        lam_ladder = np.geomspace(1e-1, 1e-4, 5)
    lam_ladder = np.asarray(lam_ladder, dtype=float)
    if (lam_ladder <= 0).any():
        raise ValueError("ladder must be real positive")
    if ball is None:
        ball = 0.1 * grid.L
    mask = grid.radius() <= ball
    dv = grid.cell_volume
    vals = []
    for lam in lam_ladder:
        d2 = resolvent_derivative(lam, f, params, order=2, step=0.25 * lam)
        e = (params.gamma2 * np.sum(d2.data[0][mask] ** 2)
             + np.sum(d2.data[1:4][:, mask] ** 2)
             + params.beta2 * np.sum(d2.data[4:13][:, mask] ** 2))
        vals.append(np.sqrt(e * dv))
    vals = np.asarray(vals)
    slope = np.polyfit(np.log(lam_ladder), np.log(vals), 1)[0]
    kind = "LogType" if slope > -0.75 else "SqrtType"
    return {"kind": kind, "slope": float(slope),
            "lambda": lam_ladder.tolist(), "values": vals.tolist()}
