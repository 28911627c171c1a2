"""Hot numeric kernels: per-mode 13x13 matrix-exponential propagation and the
RK4 finite-difference stage evaluation.

Each kernel has a numba @njit implementation and a vectorized pure-numpy
fallback.  Selection: numpy fallback is used when numba is unavailable or the
environment variable VWAVES_NO_NUMBA is set to a non-empty value.  The
benchmark script scripts/bench_kernels.py times both paths.

Mode ordering and the generator matrix follow the 13-lane convention
(phi, w1..w3, G11..G33); the per-mode system is du/dt = -Ahat(xi) u.
"""

import os

import numpy as np

_PADE13_B = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0,
    40840800.0, 960960.0, 16380.0, 182.0, 1.0,
])
_PADE13_THETA = 5.371920351148152

try:  # pragma: no cover - import guard
    if os.environ.get("VWAVES_NO_NUMBA"):
        raise ImportError("numba disabled by VWAVES_NO_NUMBA")
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    from numba import njit, prange
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range

USE_NUMBA = HAVE_NUMBA


def generator_matrix_dense(xi, nu, nutilde, beta2, gamma2):
    """Dense Ahat(xi) with d/dt uhat = -Ahat uhat (single mode, numpy)."""
    A = np.zeros((13, 13), dtype=complex)
    x1, x2, x3 = xi
    s2 = x1 * x1 + x2 * x2 + x3 * x3
    xiv = np.array([x1, x2, x3])
    # phi row: i xi . w
    A[0, 1:4] = 1j * xiv
    for j in range(3):
        # w rows: (nu|xi|^2 I + nutilde xi xi^T) w + i gamma^2 phi xi - i beta^2 G xi
        A[1 + j, 0] = 1j * gamma2 * xiv[j]
        for k in range(3):
            A[1 + j, 1 + k] = nutilde * xiv[j] * xiv[k]
            A[1 + j, 4 + 3 * j + k] = -1j * beta2 * xiv[k]
        A[1 + j, 1 + j] += nu * s2
        # G rows: -i w xi^T
        for k in range(3):
            A[4 + 3 * j + k, 1 + j] = -1j * xiv[k]
    return A


# ----------------------------------------------------------------------------
# numpy fallback: batched Pade-13 scaling and squaring
# ----------------------------------------------------------------------------

def _build_generators_numpy(xi, dt, nu, nutilde, beta2, gamma2):
    """(M,13,13) batch of -dt*Ahat(xi) for xi of shape (M,3)."""
    M = xi.shape[0]
    A = np.zeros((M, 13, 13), dtype=complex)
    s2 = np.einsum("mi,mi->m", xi, xi)
    for k in range(3):
        A[:, 0, 1 + k] = 1j * xi[:, k]
    for j in range(3):
        A[:, 1 + j, 0] = 1j * gamma2 * xi[:, j]
        for k in range(3):
            A[:, 1 + j, 1 + k] = nutilde * xi[:, j] * xi[:, k]
            A[:, 1 + j, 4 + 3 * j + k] = -1j * beta2 * xi[:, k]
            A[:, 4 + 3 * j + k, 1 + j] = -1j * xi[:, k]
        A[:, 1 + j, 1 + j] += nu * s2
    A *= -dt
    return A


def _expm13_batch_numpy(A):
    """Pade-13 expm of a (M,13,13) complex batch, grouped by scaling power."""
    M = A.shape[0]
    out = np.empty_like(A)
    norm1 = np.abs(A).sum(axis=1).max(axis=1)
    s = np.ceil(np.log2(np.maximum(norm1 / _PADE13_THETA, 1.0))).astype(int)
    b = _PADE13_B
    eye = np.eye(13, dtype=complex)
    for sv in np.unique(s):
        idx = np.where(s == sv)[0]
        As = A[idx] / (2.0 ** sv)
        A2 = As @ As
        A4 = A2 @ A2
        A6 = A2 @ A4
        U = As @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                  + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
        E = np.linalg.solve(V - U, V + U)
        for _ in range(sv):
            E = E @ E
        out[idx] = E
    return out


def advance_modes_numpy(uhat, xi, dt, nu, nutilde, beta2, gamma2,
                        chunk=16384):
    """uhat (M,13) <- expm(-dt*Ahat(xi_m)) @ uhat_m, in chunks."""
    M = uhat.shape[0]
    for lo in range(0, M, chunk):
        hi = min(lo + chunk, M)
        A = _build_generators_numpy(xi[lo:hi], dt, nu, nutilde, beta2, gamma2)
        E = _expm13_batch_numpy(A)
        uhat[lo:hi] = np.einsum("mij,mj->mi", E, uhat[lo:hi])
    return uhat


# ----------------------------------------------------------------------------
# numba path
# ----------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _matmul13(a, b, c):
        for i in range(13):
            for j in range(13):
                acc = 0.0 + 0.0j
                for k in range(13):
                    acc += a[i, k] * b[k, j]
                c[i, j] = acc

    @njit(cache=True)
    def _solve13(A, B):
        """In-place solve A X = B for 13x13 complex A, B; result in B."""
        n = 13
        for col in range(n):
            piv = col
            big = abs(A[col, col])
            for r in range(col + 1, n):
                v = abs(A[r, col])
                if v > big:
                    big = v
                    piv = r
            if piv != col:
                for c in range(n):
                    A[col, c], A[piv, c] = A[piv, c], A[col, c]
                    B[col, c], B[piv, c] = B[piv, c], B[col, c]
            inv = 1.0 / A[col, col]
            for r in range(col + 1, n):
                f = A[r, col] * inv
                if f != 0:
                    for c in range(col, n):
                        A[r, c] -= f * A[col, c]
                    for c in range(n):
                        B[r, c] -= f * B[col, c]
        for col in range(n - 1, -1, -1):
            inv = 1.0 / A[col, col]
            for c in range(n):
                acc = B[col, c]
                for r in range(col + 1, n):
                    acc -= A[col, r] * B[r, c]
                B[col, c] = acc * inv
        return B

    @njit(cache=True)
    def _expm13(A, b, work1, work2, work3, A2, A4, A6, U, V):
        norm1 = 0.0
        for j in range(13):
            colsum = 0.0
            for i in range(13):
                colsum += abs(A[i, j])
            if colsum > norm1:
                norm1 = colsum
        s = 0
        if norm1 > _PADE13_THETA:
            s = int(np.ceil(np.log2(norm1 / _PADE13_THETA)))
        if s > 0:
            f = 0.5 ** s
            for i in range(13):
                for j in range(13):
                    A[i, j] *= f
        _matmul13(A, A, A2)
        _matmul13(A2, A2, A4)
        _matmul13(A2, A4, A6)
        for i in range(13):
            for j in range(13):
                work1[i, j] = b[13] * A6[i, j] + b[11] * A4[i, j] + b[9] * A2[i, j]
        _matmul13(A6, work1, work2)
        for i in range(13):
            for j in range(13):
                work2[i, j] += b[7] * A6[i, j] + b[5] * A4[i, j] + b[3] * A2[i, j]
            work2[i, i] += b[1]
        _matmul13(A, work2, U)
        for i in range(13):
            for j in range(13):
                work1[i, j] = b[12] * A6[i, j] + b[10] * A4[i, j] + b[8] * A2[i, j]
        _matmul13(A6, work1, V)
        for i in range(13):
            for j in range(13):
                V[i, j] += b[6] * A6[i, j] + b[4] * A4[i, j] + b[2] * A2[i, j]
            V[i, i] += b[0]
        # E = (V-U)^{-1}(V+U), reusing work buffers
        for i in range(13):
            for j in range(13):
                work1[i, j] = V[i, j] - U[i, j]
                work2[i, j] = V[i, j] + U[i, j]
        E = _solve13(work1, work2)
        for _ in range(s):
            _matmul13(E, E, work3)
            for i in range(13):
                for j in range(13):
                    E[i, j] = work3[i, j]
        return E

    @njit(parallel=True, cache=True)
    def _advance_modes_numba(uhat, xi, dt, nu, nutilde, beta2, gamma2, b):
        M = uhat.shape[0]
        for m in prange(M):
            A = np.empty((13, 13), dtype=np.complex128)
            A2 = np.empty((13, 13), dtype=np.complex128)
            A4 = np.empty((13, 13), dtype=np.complex128)
            A6 = np.empty((13, 13), dtype=np.complex128)
            w1 = np.empty((13, 13), dtype=np.complex128)
            w2 = np.empty((13, 13), dtype=np.complex128)
            w3 = np.empty((13, 13), dtype=np.complex128)
            U = np.empty((13, 13), dtype=np.complex128)
            V = np.empty((13, 13), dtype=np.complex128)
            x1 = xi[m, 0]
            x2 = xi[m, 1]
            x3 = xi[m, 2]
            s2 = x1 * x1 + x2 * x2 + x3 * x3
            for i in range(13):
                for j in range(13):
                    A[i, j] = 0.0
            A[0, 1] = 1j * x1
            A[0, 2] = 1j * x2
            A[0, 3] = 1j * x3
            for j in range(3):
                xj = x1 if j == 0 else (x2 if j == 1 else x3)
                A[1 + j, 0] = 1j * gamma2 * xj
                for k in range(3):
                    xk = x1 if k == 0 else (x2 if k == 1 else x3)
                    A[1 + j, 1 + k] = nutilde * xj * xk
                    A[1 + j, 4 + 3 * j + k] = -1j * beta2 * xk
                    A[4 + 3 * j + k, 1 + j] = -1j * xk
                A[1 + j, 1 + j] += nu * s2
            for i in range(13):
                for j in range(13):
                    A[i, j] *= -dt
            E = _expm13(A, b, w1, w2, w3, A2, A4, A6, U, V)
            v = np.empty(13, dtype=np.complex128)
            for i in range(13):
                acc = 0.0 + 0.0j
                for k in range(13):
                    acc += E[i, k] * uhat[m, k]
                v[i] = acc
            for i in range(13):
                uhat[m, i] = v[i]

    def advance_modes_numba(uhat, xi, dt, nu, nutilde, beta2, gamma2):
        _advance_modes_numba(uhat, xi, dt, nu, nutilde, beta2, gamma2,
                             _PADE13_B)
        return uhat


def advance_modes(uhat, xi, dt, nu, nutilde, beta2, gamma2):
    """Advance per-mode coefficients by exp(-dt*Ahat(xi)), in place.

    uhat: (M, 13) complex, xi: (M, 3) float.
    """
    if USE_NUMBA:
        return advance_modes_numba(uhat, xi, dt, nu, nutilde, beta2, gamma2)
    return advance_modes_numpy(uhat, xi, dt, nu, nutilde, beta2, gamma2)


# ----------------------------------------------------------------------------
# finite-difference RHS for the exterior time stepper
# ----------------------------------------------------------------------------
# Fields are ghosted arrays (13, n+2, n+2, n+2); ghosts are refreshed by the
# caller (zero for the truncated box, wrapped for the periodic test mode).
# Two-pass evaluation through a div(w) buffer keeps grad(div) equal to the
# negative adjoint of div, which makes the semi-discrete energy identity exact.

def rhs_numpy(u, divw, out, h, nu, nutilde, gamma2, beta2, sigma):
    """Pure-numpy RHS on ghosted arrays; divw must be precomputed with fresh
    ghosts; sigma is (n,n,n) (interior only)."""
    C = slice(1, -1)
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)

    def dx(a, ax):
        sl_p = [C, C, C]
        sl_m = [C, C, C]
        sl_p[ax] = slice(2, None)
        sl_m[ax] = slice(0, -2)
        return (a[tuple(sl_p)] - a[tuple(sl_m)]) * inv2h

    def lap(a):
        acc = -6.0 * a[C, C, C]
        for ax in range(3):
            sl_p = [C, C, C]
            sl_m = [C, C, C]
            sl_p[ax] = slice(2, None)
            sl_m[ax] = slice(0, -2)
            acc = acc + a[tuple(sl_p)] + a[tuple(sl_m)]
        return acc * invh2

    out[0][C, C, C] = -divw[C, C, C] - sigma * u[0][C, C, C]
    for j in range(3):
        divG = dx(u[4 + 3 * j + 0], 0) + dx(u[4 + 3 * j + 1], 1) + dx(u[4 + 3 * j + 2], 2)
        out[1 + j][C, C, C] = (nu * lap(u[1 + j]) + nutilde * dx(divw, j)
                               - gamma2 * dx(u[0], j) + beta2 * divG
                               - sigma * u[1 + j][C, C, C])
        for k in range(3):
            out[4 + 3 * j + k][C, C, C] = dx(u[1 + j], k) - sigma * u[4 + 3 * j + k][C, C, C]
    return out


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _divw_numba(u, divw, h):
        n = u.shape[1] - 2
        inv2h = 1.0 / (2.0 * h)
        for i in prange(1, n + 1):
            for j in range(1, n + 1):
                for k in range(1, n + 1):
                    divw[i, j, k] = ((u[1, i + 1, j, k] - u[1, i - 1, j, k])
                                     + (u[2, i, j + 1, k] - u[2, i, j - 1, k])
                                     + (u[3, i, j, k + 1] - u[3, i, j, k - 1])) * inv2h

    @njit(parallel=True, cache=True)
    def _rhs_numba(u, divw, out, h, nu, nutilde, gamma2, beta2, sigma):
        n = u.shape[1] - 2
        inv2h = 1.0 / (2.0 * h)
        invh2 = 1.0 / (h * h)
        for i in prange(1, n + 1):
            for j in range(1, n + 1):
                for k in range(1, n + 1):
                    sg = sigma[i - 1, j - 1, k - 1]
                    out[0, i, j, k] = -divw[i, j, k] - sg * u[0, i, j, k]
                    dphix = (u[0, i + 1, j, k] - u[0, i - 1, j, k]) * inv2h
                    dphiy = (u[0, i, j + 1, k] - u[0, i, j - 1, k]) * inv2h
                    dphiz = (u[0, i, j, k + 1] - u[0, i, j, k - 1]) * inv2h
                    ddivx = (divw[i + 1, j, k] - divw[i - 1, j, k]) * inv2h
                    ddivy = (divw[i, j + 1, k] - divw[i, j - 1, k]) * inv2h
                    ddivz = (divw[i, j, k + 1] - divw[i, j, k - 1]) * inv2h
                    for c in range(3):
                        wc = 1 + c
                        lapw = (u[wc, i + 1, j, k] + u[wc, i - 1, j, k]
                                + u[wc, i, j + 1, k] + u[wc, i, j - 1, k]
                                + u[wc, i, j, k + 1] + u[wc, i, j, k - 1]
                                - 6.0 * u[wc, i, j, k]) * invh2
                        g0 = 4 + 3 * c
                        divG = ((u[g0, i + 1, j, k] - u[g0, i - 1, j, k])
                                + (u[g0 + 1, i, j + 1, k] - u[g0 + 1, i, j - 1, k])
                                + (u[g0 + 2, i, j, k + 1] - u[g0 + 2, i, j, k - 1])) * inv2h
                        dphi = dphix if c == 0 else (dphiy if c == 1 else dphiz)
                        ddiv = ddivx if c == 0 else (ddivy if c == 1 else ddivz)
                        out[wc, i, j, k] = (nu * lapw + nutilde * ddiv
                                            - gamma2 * dphi + beta2 * divG
                                            - sg * u[wc, i, j, k])
                        dwx = (u[wc, i + 1, j, k] - u[wc, i - 1, j, k]) * inv2h
                        dwy = (u[wc, i, j + 1, k] - u[wc, i, j - 1, k]) * inv2h
                        dwz = (u[wc, i, j, k + 1] - u[wc, i, j, k - 1]) * inv2h
                        out[g0, i, j, k] = dwx - sg * u[g0, i, j, k]
                        out[g0 + 1, i, j, k] = dwy - sg * u[g0 + 1, i, j, k]
                        out[g0 + 2, i, j, k] = dwz - sg * u[g0 + 2, i, j, k]


def rhs_fd(u, divw, out, h, nu, nutilde, gamma2, beta2, sigma,
           refresh_ghosts):
    """Evaluate the FD right-hand side on ghosted arrays.

    refresh_ghosts(a) must fill the ghost shell of a 3d ghosted array (used
    for the div(w) buffer between the two passes).
    """
    if USE_NUMBA:
        _divw_numba(u, divw, h)
        refresh_ghosts(divw)
        _rhs_numba(u, divw, out, h, nu, nutilde, gamma2, beta2, sigma)
        return out
    C = slice(1, -1)
    inv2h = 1.0 / (2.0 * h)
    divw[C, C, C] = ((u[1, 2:, C, C] - u[1, :-2, C, C])
                     + (u[2, C, 2:, C] - u[2, C, :-2, C])
                     + (u[3, C, C, 2:] - u[3, C, C, :-2])) * inv2h
    refresh_ghosts(divw)
    return rhs_numpy(u, divw, out, h, nu, nutilde, gamma2, beta2, sigma)
