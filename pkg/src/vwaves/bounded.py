"""Masked-grid elliptic solvers and the bounded-domain zero resolvent.

Domains are box / ball / shell regions carved out of a uniform lattice with
zero-Dirichlet values at exterior cells (staircase boundary for curved
domains, first-order accurate).  The solvers are matrix-free conjugate
gradients on the 7-point Laplacian and the elastic operator -a*Lap - b*grad
div (both SPD on the Dirichlet subspace).

The zero resolvent A u = f is assembled constructively:
    w = (-Lap_D)^{-1} div f3,
    psi solves -beta^2 Lap psi - gamma^2 grad div psi
                = nu_tilde grad f1 + f2 - nu div f3,
    G = grad psi,  phi = -tr G  (mean zero).
"""

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

__all__ = [
    "MaskedGrid", "EllipticSpec", "CGError", "solve_poisson_dirichlet",
    "solve_elastic_dirichlet", "zero_resolvent_bounded", "masked_gradient",
    "masked_divergence_rows", "apply_A_masked",
]


class CGError(RuntimeError):
    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


class EllipticSpec:
    """Operator -a*Lap - b*grad div with zero Dirichlet data."""

    def __init__(self, a, b=0.0):
        if not a > 0:
            raise ValueError("need a > 0")
        if b < 0:
            raise ValueError("need b >= 0")
        self.a = float(a)
        self.b = float(b)


class MaskedGrid:
    """Uniform lattice with an interior mask.

    kind: 'box' (node-aligned Dirichlet faces), 'ball' (|x| < b) or
    'shell' (r0 < |x| < b); curved boundaries are staircase.
    """

    def __init__(self, x1d, interior, kind, meta=None):
        self.x1d = x1d
        self.h = float(x1d[0][1] - x1d[0][0])
        self.interior = interior
        self.kind = kind
        self.meta = meta or {}
        self.shape = interior.shape
        self.n_interior = int(interior.sum())
        ext = ~interior
        adj = np.zeros_like(interior)
        for ax in range(3):
            adj |= np.roll(ext, 1, axis=ax) | np.roll(ext, -1, axis=ax)
        # lattice edges count as exterior neighbors
        for ax in range(3):
            sl = [slice(None)] * 3
            sl[ax] = 0
            adj[tuple(sl)] = True
            sl[ax] = -1
            adj[tuple(sl)] = True
        self.boundary_adjacent = interior & adj

    @classmethod
    def box(cls, n, lo=0.0, hi=1.0):
        """Unit-style box with nodes on the Dirichlet faces; interior nodes
        are 1..n-1 per axis."""
        x = np.linspace(lo, hi, n + 1)
        interior = np.zeros((n + 1,) * 3, dtype=bool)
        interior[1:-1, 1:-1, 1:-1] = True
        return cls((x, x, x), interior, "box", {"lo": lo, "hi": hi, "n": n})

    @classmethod
    def ball(cls, radius, h, pad=2):
        m = int(np.ceil(radius / h)) + pad
        x = h * np.arange(-m, m + 1)
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij", sparse=True)
        r = np.sqrt(X**2 + Y**2 + Z**2)
        return cls((x, x, x), r < radius, "ball", {"radius": radius})

    @classmethod
    def shell(cls, outer, inner, h, pad=2):
        m = int(np.ceil(outer / h)) + pad
        x = h * np.arange(-m, m + 1)
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij", sparse=True)
        r = np.sqrt(X**2 + Y**2 + Z**2)
        interior = (r < outer) & (r > inner)
        return cls((x, x, x), interior, "shell",
                   {"outer": outer, "inner": inner})

    @classmethod
    def from_periodic(cls, grid, outer, inner=0.0, pad=2):
        """Shell/ball window on the lattice of a PeriodicGrid (same spacing
        and alignment, so lane transfer is plain indexing)."""
        x = grid.x1d
        sel = np.abs(x) <= outer + (pad + 0.5) * grid.h
        idx = np.where(sel)[0]
        xs = x[sel]
        X, Y, Z = np.meshgrid(xs, xs, xs, indexing="ij", sparse=True)
        r = np.sqrt(X**2 + Y**2 + Z**2)
        interior = (r < outer)
        if inner > 0:
            interior &= (r > inner)
        kind = "shell" if inner > 0 else "ball"
        mg = cls((xs, xs, xs), interior, kind,
                 {"outer": outer, "inner": inner, "index_window": idx})
        return mg

    def coords(self):
        x, y, z = self.x1d
        return np.meshgrid(x, y, z, indexing="ij", sparse=True)

    def radius(self):
        X, Y, Z = self.coords()
        return np.sqrt(X**2 + Y**2 + Z**2)

    def zero_exterior(self, field):
        out = np.array(field, dtype=float)
        out[..., ~self.interior] = 0.0
        return out


def _lap(u, h):
    """7-point Laplacian with zero beyond the array edge."""
    out = -6.0 * u
    for ax in range(3):
        out += np.roll(u, 1, axis=ax) + np.roll(u, -1, axis=ax)
        # cancel the wrap-around of np.roll (edge reads zero)
        sl = [slice(None)] * 3
        sl[ax] = 0
        out[tuple(sl)] -= np.take(u, -1, axis=ax)
        sl[ax] = -1
        out[tuple(sl)] -= np.take(u, 0, axis=ax)
    return out / (h * h)


def _d_central(u, ax, h):
    """Centered first difference with zero beyond the array edge."""
    up = np.roll(u, -1, axis=ax)
    um = np.roll(u, 1, axis=ax)
    sl = [slice(None)] * 3
    sl[ax] = -1
    up[tuple(sl)] = 0.0
    sl[ax] = 0
    um[tuple(sl)] = 0.0
    return (up - um) / (2.0 * h)


def _masked_lap_apply(u_int, grid):
    u = np.zeros(grid.shape)
    u[grid.interior] = u_int
    return _lap(u, grid.h)[grid.interior]


def _d2(u, ax, h):
    """Second difference with zero beyond the array edge."""
    up = np.roll(u, -1, axis=ax)
    um = np.roll(u, 1, axis=ax)
    sl = [slice(None)] * 3
    sl[ax] = -1
    up[tuple(sl)] = 0.0
    sl[ax] = 0
    um[tuple(sl)] = 0.0
    return (up - 2.0 * u + um) / (h * h)


def _d_cross(u, ax1, ax2, h):
    """Mixed second difference (4-corner stencil), zero beyond the edge."""
    def shift(a, ax, k):
        out = np.roll(a, -k, axis=ax)
        sl = [slice(None)] * 3
        sl[ax] = slice(-k, None) if k > 0 else slice(0, -k)
        out[tuple(sl)] = 0.0
        return out

    pp = shift(shift(u, ax1, 1), ax2, 1)
    mm = shift(shift(u, ax1, -1), ax2, -1)
    pm = shift(shift(u, ax1, 1), ax2, -1)
    mp = shift(shift(u, ax1, -1), ax2, 1)
    return (pp + mm - pm - mp) / (4.0 * h * h)


def grad_div(w, h):
    """(grad div w)_j = sum_k d_j d_k w_k with compact mixed stencils
    (symmetric positive semidefinite as -grad div on the Dirichlet space,
    uniformly second-order consistent at node-aligned boundaries)."""
    out = np.empty_like(w)
    for j in range(3):
        acc = _d2(w[j], j, h)
        for k in range(3):
            if k != j:
                acc = acc + _d_cross(w[k], j, k, h)
        out[j] = acc
    return out


def _masked_elastic_apply(w_int, grid, a, b):
    nin = grid.n_interior
    w = np.zeros((3,) + grid.shape)
    for c in range(3):
        w[c][grid.interior] = w_int[c * nin:(c + 1) * nin]
    out = np.empty_like(w_int)
    gd = grad_div(w, grid.h)
    for c in range(3):
        val = -a * _lap(w[c], grid.h) - b * gd[c]
        out[c * nin:(c + 1) * nin] = val[grid.interior]
    return out


def _run_cg(op, rhs, grid, rtol=1e-10, maxiter=None, diag=None):
    history = []
    nrm = np.linalg.norm(rhs)
    if nrm == 0.0:
        return np.zeros_like(rhs)
    A = LinearOperator((rhs.size, rhs.size), matvec=op, dtype=float)
    M = None
    if diag is not None:
        M = LinearOperator((rhs.size, rhs.size),
                           matvec=lambda v: v / diag, dtype=float)
    if maxiter is None:
        maxiter = max(2000, 20 * max(grid.shape))

    def cb(xk):
        history.append(float(np.linalg.norm(op(xk) - rhs) / nrm))

    x, info = cg(A, rhs, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
    if info != 0:
        raise CGError(f"CG stagnated (info={info}) after {len(history)} "
                      f"iterations, residual {history[-1] if history else 'n/a'}",
                      history)
    return x


def solve_poisson_dirichlet(f, grid, rtol=1e-10):
    """(-Lap_D)^{-1} f componentwise; f: (C, ...) or (...) full-lattice array."""
    f = np.asarray(f, dtype=float)
    single = f.ndim == 3
    comps = f[None] if single else f
    out = np.zeros_like(comps)
    diag = 6.0 / grid.h**2
    for c in range(comps.shape[0]):
        rhs = comps[c][grid.interior]
        sol = _run_cg(lambda v: -_masked_lap_apply(v, grid), rhs, grid,
                      rtol=rtol, diag=diag)
        out[c][grid.interior] = sol
    return out[0] if single else out


def solve_elastic_dirichlet(spec, f, grid, rtol=1e-10):
    """(-a*Lap - b*grad div)^{-1} f for a 3-vector field f."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != 3:
        raise ValueError("elastic solve needs a 3-vector field")
    nin = grid.n_interior
    rhs = np.concatenate([f[c][grid.interior] for c in range(3)])
    diag = 6.0 * spec.a / grid.h**2 + spec.b / (2.0 * grid.h**2)
    sol = _run_cg(lambda v: _masked_elastic_apply(v, grid, spec.a, spec.b),
                  rhs, grid, rtol=rtol, diag=diag)
    out = np.zeros((3,) + grid.shape)
    for c in range(3):
        out[c][grid.interior] = sol[c * nin:(c + 1) * nin]
    return out


def masked_gradient(field, grid):
    """Gradient of a scalar lattice field: centered in the interior,
    one-sided (2-point) at boundary-adjacent cells."""
    h = grid.h
    out = np.zeros((3,) + grid.shape)
    inside = grid.interior
    for ax in range(3):
        fp = np.roll(field, -1, axis=ax)
        fm = np.roll(field, 1, axis=ax)
        okp = np.roll(inside, -1, axis=ax)
        okm = np.roll(inside, 1, axis=ax)
        sl = [slice(None)] * 3
        sl[ax] = -1
        okp[tuple(sl)] = False
        sl[ax] = 0
        okm[tuple(sl)] = False
        centered = (fp - fm) / (2.0 * h)
        fwd = (fp - field) / h
        bwd = (field - fm) / h
        g = np.where(okp & okm, centered,
                     np.where(okp, fwd, np.where(okm, bwd, 0.0)))
        out[ax] = np.where(inside, g, 0.0)
    return out


def masked_divergence_rows(T, grid):
    """Row-wise divergence (div T)^j = sum_k d_k T[j,k] of a (3,3,...) field,
    centered differences reading zero outside the interior support."""
    out = np.zeros((3,) + grid.shape)
    for j in range(3):
        out[j] = sum(_d_central(T[j, k], k, grid.h) for k in range(3))
    return out


def zero_resolvent_bounded(f, grid, params, rtol=1e-10, mean_tol=1e-10):
    """Constructive solution of A u = f on the masked domain, w|_boundary = 0.

    f: (13, ...) lattice array (lanes as in grid.State), supported on the
    interior.  Returns (u, psi) with u a (13, ...) array and G = grad(psi).
    Requires the interior mean of f1 to vanish (else the problem is
    inconsistent and the solution non-unique).
    """
    if params.beta2 == 0.0:
        raise ValueError("bounded zero resolvent needs beta > 0")
    f = np.asarray(f, dtype=float)
    inside = grid.interior
    f1 = f[0]
    scale = np.sqrt(np.mean(f1[inside] ** 2))
    mean_f1 = abs(f1[inside].mean())
    if mean_f1 > mean_tol * max(1.0, scale):
        raise ValueError(
            f"int f1 = {mean_f1:.3e} != 0: bounded zero-resolvent input "
            "must have zero mean (solution otherwise non-unique)")
    f3 = f[4:13].reshape((3, 3) + grid.shape)
    divf3 = masked_divergence_rows(f3, grid)
    w = solve_poisson_dirichlet(grid.zero_exterior(divf3), grid, rtol=rtol)

    gradf1 = np.stack([_d_central(f1, ax, grid.h) for ax in range(3)])
    rhs = params.nu_tilde * gradf1 + f[1:4] - params.nu * divf3
    spec = EllipticSpec(a=params.beta2, b=params.gamma2)
    psi = solve_elastic_dirichlet(spec, grid.zero_exterior(rhs), grid, rtol=rtol)

    u = np.zeros_like(f)
    u[1:4] = w
    G = np.stack([masked_gradient(psi[j], grid) for j in range(3)])
    u[4:13] = G.reshape((9,) + grid.shape)
    trG = G[0, 0] + G[1, 1] + G[2, 2]
    phi = -trG
    phi[inside] -= phi[inside].mean()
    phi[~inside] = 0.0
    u[0] = phi
    return u, psi


def apply_A_masked(u, grid, params):
    """Discrete A on the masked lattice (centered differences, zero-exterior
    reads); used as the residual measure for the constructive solver."""
    u = np.asarray(u, dtype=float)
    h = grid.h
    out = np.zeros_like(u)
    w = u[1:4]
    divw = sum(_d_central(w[c], c, h) for c in range(3))
    out[0] = divw
    G = u[4:13].reshape((3, 3) + grid.shape)
    divG = masked_divergence_rows(G, grid)
    gd = grad_div(w, h)
    for j in range(3):
        out[1 + j] = (-params.nu * _lap(w[j], h)
                      - params.nu_tilde * gd[j]
                      + params.gamma2 * _d_central(u[0], j, h)
                      - params.beta2 * divG[j])
        for k in range(3):
            out[4 + 3 * j + k] = -_d_central(w[j], k, h)
    out[:, ~grid.interior] = 0.0
    return out
