"""Periodic grid, 13-component field containers and snapshot I/O.

The 13 scalar lanes are ordered (phi, w1, w2, w3, G11, G12, ..., G33); a
State stores them as one (13, n, n, n) float array (structure of arrays),
a SpectralState stores the rfft half-spectrum as (13, n, n, n//2+1) complex.

Derivative convention: wavevectors come from fftfreq scaled by pi/L; the
Nyquist entries are zeroed so that every multiplier built from the tables
maps real fields to real fields exactly.
"""

import struct

import numpy as np

SNAPSHOT_MAGIC = b"VWAV1"
NCOMP = 13


class SpectrumTables:
    """Wavevector tables broadcastable over one spectrum layout."""

    __slots__ = ("xi1", "xi2", "xi3", "xi_sq", "half")

    def __init__(self, xi1, xi2, xi3, xi_sq, half):
        self.xi1, self.xi2, self.xi3 = xi1, xi2, xi3
        self.xi_sq = xi_sq
        self.half = half

    @property
    def xi(self):
        return (self.xi1, self.xi2, self.xi3)


class PeriodicGrid:
    """Uniform periodic grid on the box [-L, L)^3 with n points per axis."""

    def __init__(self, n, L):
        if n < 8 or n % 2 != 0:
            raise ValueError(f"n must be even and >= 8, got {n}")
        if not L > 0:
            raise ValueError(f"L must be positive, got {L}")
        self.n = int(n)
        self.L = float(L)
        self.h = 2.0 * self.L / self.n
        self.x1d = -self.L + self.h * np.arange(self.n)

        # full-axis wavevectors, Nyquist zeroed (see module docstring)
        k = np.fft.fftfreq(self.n, d=self.h) * 2.0 * np.pi
        k[self.n // 2] = 0.0
        self.k_full = k
        # half-spectrum along the last axis (rfft layout)
        kz = np.fft.rfftfreq(self.n, d=self.h) * 2.0 * np.pi
        kz[-1] = 0.0
        self.k_half = kz
        self.nz = self.n // 2 + 1

        self.xi1 = k.reshape(-1, 1, 1)
        self.xi2 = k.reshape(1, -1, 1)
        self.xi3 = kz.reshape(1, 1, -1)
        self.xi_sq = self.xi1**2 + self.xi2**2 + self.xi3**2

    @property
    def spectral_shape(self):
        return (self.n, self.n, self.nz)

    def tables(self, half=True):
        """Broadcastable wavevector tables for either spectrum layout."""
        if half:
            return SpectrumTables(self.xi1, self.xi2, self.xi3, self.xi_sq, True)
        if not hasattr(self, "_full_tables"):
            k = self.k_full
            x1 = k.reshape(-1, 1, 1)
            x2 = k.reshape(1, -1, 1)
            x3 = k.reshape(1, 1, -1)
            self._full_tables = SpectrumTables(x1, x2, x3,
                                               x1**2 + x2**2 + x3**2, False)
        return self._full_tables

    @property
    def shape(self):
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self):
        return self.h**3

    def x_mesh(self):
        """Broadcastable coordinate arrays (x, y, z)."""
        return (self.x1d.reshape(-1, 1, 1), self.x1d.reshape(1, -1, 1),
                self.x1d.reshape(1, 1, -1))

    def radius(self):
        x, y, z = self.x_mesh()
        return np.sqrt(x**2 + y**2 + z**2)

    def xi_flat(self):
        """(M, 3) array of wavevectors in rfft layout order."""
        n, nz = self.n, self.nz
        out = np.empty((n * n * nz, 3))
        out[:, 0] = np.broadcast_to(self.xi1, self.spectral_shape).ravel()
        out[:, 1] = np.broadcast_to(self.xi2, self.spectral_shape).ravel()
        out[:, 2] = np.broadcast_to(self.xi3, self.spectral_shape).ravel()
        return out

    def __eq__(self, other):
        return (isinstance(other, PeriodicGrid) and self.n == other.n
                and self.L == other.L)

    def __repr__(self):
        return f"PeriodicGrid(n={self.n}, L={self.L})"


class State:
    """13-component field on a PeriodicGrid.

    Physical states are real; resolvent output at complex spectral parameter
    is complex-valued and kept so.
    """

    def __init__(self, grid, data=None):
        self.grid = grid
        if data is None:
            data = np.zeros((NCOMP,) + grid.shape)
        else:
            data = np.asarray(data)
            if not np.iscomplexobj(data):
                data = data.astype(float)
            if data.shape != (NCOMP,) + grid.shape:
                raise ValueError(f"bad field shape {data.shape}")
        self.data = data

    @property
    def is_complex(self):
        return np.iscomplexobj(self.data)

    @property
    def phi(self):
        return self.data[0]

    @property
    def w(self):
        return self.data[1:4]

    @property
    def G(self):
        n = self.grid.n
        return self.data[4:13].reshape(3, 3, n, n, n)

    def copy(self):
        return State(self.grid, self.data.copy())

    def __add__(self, other):
        return State(self.grid, self.data + other.data)

    def __sub__(self, other):
        return State(self.grid, self.data - other.data)

    def __mul__(self, c):
        return State(self.grid, self.data * c)

    __rmul__ = __mul__

    def norm2(self):
        """Grid-weighted l2 norm of the full 13-lane vector."""
        return np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.cell_volume)

    def fft(self):
        """rfft half-spectrum (real states only)."""
        if self.is_complex:
            raise TypeError("rfft path is for real states; use fftn_full")
        return SpectralState(self.grid, np.fft.rfftn(self.data, axes=(1, 2, 3)))

    def fftn_full(self):
        """(13, n, n, n) full complex spectrum."""
        return np.fft.fftn(self.data, axes=(1, 2, 3))


class SpectralState:
    """rfft half-spectrum coefficients of the 13 lanes."""

    def __init__(self, grid, data=None, zero_mode_zeroed=False):
        self.grid = grid
        if data is None:
            data = np.zeros((NCOMP,) + grid.spectral_shape, dtype=complex)
        self.data = data
        self.zero_mode_zeroed = zero_mode_zeroed

    @property
    def phi(self):
        return self.data[0]

    @property
    def w(self):
        return self.data[1:4]

    @property
    def G(self):
        n, nz = self.grid.n, self.grid.nz
        return self.data[4:13].reshape(3, 3, n, n, nz)

    def copy(self):
        return SpectralState(self.grid, self.data.copy(), self.zero_mode_zeroed)

    def drop_zero_mode(self):
        self.data[:, 0, 0, 0] = 0.0
        self.zero_mode_zeroed = True
        return self

    def ifft(self):
        n = self.grid.n
        return State(self.grid,
                     np.fft.irfftn(self.data, s=(n, n, n), axes=(1, 2, 3)))


def state_from_full_spectrum(grid, uhat, real_if_close=True):
    """Inverse fftn of a (13, n, n, n) spectrum; drops a negligible imaginary
    part when the field is real to rounding."""
    data = np.fft.ifftn(uhat, axes=(1, 2, 3))
    if real_if_close:
        scale = np.abs(data).max()
        if scale == 0 or np.abs(data.imag).max() <= 1e-12 * scale:
            data = data.real.copy()
    return State(grid, data)


def save_snapshot(path, state):
    """Binary snapshot: magic 'VWAV1', u64 n, f64 L, 13 lanes of little-endian
    f64 in lexicographic (x, y, z) order, ordered phi, w1..w3, G11..G33."""
    grid = state.grid
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<Q", grid.n))
        fh.write(struct.pack("<d", grid.L))
        for c in range(NCOMP):
            fh.write(np.ascontiguousarray(state.data[c], dtype="<f8").tobytes())


def load_snapshot(path):
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"bad snapshot magic {magic!r}")
        n = struct.unpack("<Q", fh.read(8))[0]
        L = struct.unpack("<d", fh.read(8))[0]
        grid = PeriodicGrid(n, L)
        data = np.empty((NCOMP, n, n, n))
        count = n * n * n
        for c in range(NCOMP):
            buf = np.frombuffer(fh.read(8 * count), dtype="<f8", count=count)
            data[c] = buf.reshape(n, n, n)
    return State(grid, data)
