"""Periodic-box spectral discretization of -Laplacian + (-Laplacian)^s.

A field lives on the uniform grid of the box [-L, L]^n with N points per
axis; its discrete Fourier coefficients sit at the frequencies
xi_k = k / (2L), k in {-N/2, ..., N/2 - 1}^n.  The operator acts as the
Fourier multiplier w^2 + w^{2s} with the angular wavenumber w = 2 pi |xi|,
i.e. the multiplier of the classical Laplacian plus its fractional power,
so that plane waves e^{2 pi i xi.x} are eigenfunctions with the continuum
eigenvalues.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .params import KernelParams

_CONJ_SYM_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [-L, L]^n sampled with N points per axis."""

    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"supported dimensions are 2 and 3, got {self.n}")
        if self.L <= 0:
            raise ValueError("box half-width L must be positive")
        N = self.N
        if N < 16 or N % 2 or (N & (N - 1)):
            raise ValueError(f"N must be a power of two >= 16, got {N}")

    @property
    def spacing(self):
        return 2.0 * self.L / self.N

    @property
    def cell_volume(self):
        return self.spacing ** self.n

    @property
    def shape(self):
        return (self.N,) * self.n

    def axis(self):
        """Physical coordinates along one axis."""
        return -self.L + self.spacing * np.arange(self.N)

    def meshgrid(self):
        ax = self.axis()
        return np.meshgrid(*([ax] * self.n), indexing="ij")

    def radius(self, center=None):
        """Distance from ``center`` (grid point coordinates) at every node."""
        mesh = self.meshgrid()
        if center is None:
            center = (0.0,) * self.n
        return np.sqrt(sum((m - c) ** 2 for m, c in zip(mesh, center)))

    def angular_wavenumber_sq(self):
        """w^2 = |2 pi xi_k|^2 on the full FFT frequency layout."""
        w1 = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.spacing)
        out = np.zeros(self.shape)
        for ax in range(self.n):
            shape = [1] * self.n
            shape[ax] = self.N
            out = out + (w1 ** 2).reshape(shape)
        return out


@dataclass
class RealField:
    """A real-valued function sampled on a GridSpec."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != self.grid.shape:
            raise GridMismatchError(
                f"data shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field values must be finite")

    def copy(self):
        return RealField(self.grid, self.data.copy())


@dataclass
class SpectralCoeffs:
    """Full-layout DFT coefficients of a real field (conjugate symmetric)."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != self.grid.shape:
            raise GridMismatchError(
                f"coeffs shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    def conjugate_symmetry_defect(self):
        """Max deviation from c(-k) = conj(c(k)), relative to the peak coefficient."""
        c = self.coeffs
        flipped = c
        for ax in range(c.ndim):
            flipped = np.flip(np.roll(flipped, -1, axis=ax), axis=ax)
        scale = np.abs(c).max()
        if scale == 0.0:
            return 0.0
        return float(np.abs(flipped - np.conj(c)).max() / scale)

    def is_conjugate_symmetric(self, tol=_CONJ_SYM_TOL):
        return self.conjugate_symmetry_defect() <= tol


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError("operands live on different grids")


def forward(f):
    """DFT coefficients of a real field; the zero mode equals the mean."""
    c = np.fft.fftn(f.data) / f.grid.N ** f.grid.n
    return SpectralCoeffs(f.grid, c)


def inverse(c):
    """Real field with the given DFT coefficients."""
    data = np.fft.ifftn(c.coeffs * c.grid.N ** c.grid.n)
    return RealField(c.grid, data.real)


def operator_symbol(w_sq, s):
    """Multiplier of -Laplacian + (-Laplacian)^s at squared angular wavenumber w_sq."""
    return w_sq + w_sq ** s


def apply_operator(f, params, include_identity=False):
    """Apply -Laplacian + (-Laplacian)^s (optionally + identity) spectrally."""
    m = operator_symbol(f.grid.angular_wavenumber_sq(), params.s)
    if include_identity:
        m = m + 1.0
    out = np.fft.ifftn(m * np.fft.fftn(f.data))
    return RealField(f.grid, out.real)


def apply_resolvent(f, params):
    """Invert identity + operator: divide by 1 + w^2 + w^{2s} in frequency space."""
    m = operator_symbol(f.grid.angular_wavenumber_sq(), params.s)
    out = np.fft.ifftn(np.fft.fftn(f.data) / (1.0 + m))
    return RealField(f.grid, out.real)


def inner_product_s(f, g, params):
    """The H^1-equivalent inner product <f, (1 + w^2 + w^{2s}) g> on the box."""
    _require_same_grid(f, g)
    grid = f.grid
    m = operator_symbol(grid.angular_wavenumber_sq(), params.s)
    cf = np.fft.fftn(f.data) / grid.N ** grid.n
    cg = np.fft.fftn(g.data) / grid.N ** grid.n
    vol = (2.0 * grid.L) ** grid.n
    return float(vol * np.sum((1.0 + m) * np.conj(cf) * cg).real)


def norms(f, params, p=None):
    """Discrete norms of a field.

    Returns a dict with keys l2, h1_seminorm, hs_seminorm, linf, sobolev_s
    and, when ``p`` is given, lp.  The L^2 quantities use the spectral
    (Parseval-exact) quadrature; sobolev_s^2 = l2^2 + h1^2 + hs^2.
    """
    grid = f.grid
    c = np.abs(np.fft.fftn(f.data) / grid.N ** grid.n) ** 2
    vol = (2.0 * grid.L) ** grid.n
    w_sq = grid.angular_wavenumber_sq()
    l2_sq = vol * c.sum()
    h1_sq = vol * (w_sq * c).sum()
    hs_sq = vol * (w_sq ** params.s * c).sum()
    out = {
        "l2": float(np.sqrt(l2_sq)),
        "h1_seminorm": float(np.sqrt(h1_sq)),
        "hs_seminorm": float(np.sqrt(hs_sq)),
        "linf": float(np.abs(f.data).max()),
        "sobolev_s": float(np.sqrt(l2_sq + h1_sq + hs_sq)),
    }
    if p is not None:
        if p < 1:
            raise ValueError("lp norm requires p >= 1")
        out["lp"] = float((grid.cell_volume * (np.abs(f.data) ** p).sum()) ** (1.0 / p))
    return out


def positive_part_power(f, p, dealias=False):
    """(max(f, 0))^p, pointwise or with zero-padding dealiasing.

    The dealiased path (integer p only) evaluates the power on a grid
    refined by the factor ceil((p+1)/2) and truncates back, so that no
    aliased energy from the product lands on retained modes.
    """
    if p <= 0:
        raise ValueError("power p must be positive")
    if not dealias:
        return RealField(f.grid, np.maximum(f.data, 0.0) ** p)
    if not float(p).is_integer():
        raise ValueError("dealiasing by zero padding requires an integer power")
    grid = f.grid
    factor = int(np.ceil((p + 1) / 2))
    M = factor * grid.N
    c = np.fft.fftn(f.data) / grid.N ** grid.n
    big = np.zeros((M,) * grid.n, dtype=complex)
    idx = np.fft.fftfreq(grid.N, d=1.0 / grid.N).astype(int)
    big[np.ix_(*([idx] * grid.n))] = c
    fine = np.fft.ifftn(big * M ** grid.n).real
    powered = np.maximum(fine, 0.0) ** p
    cp = np.fft.fftn(powered) / M ** grid.n
    kept = cp[np.ix_(*([idx] * grid.n))]
    data = np.fft.ifftn(kept * grid.N ** grid.n).real
    return RealField(grid, data)


# ---------------------------------------------------------------------------
# serialization


def write_field(path, f):
    """Write a field as little-endian float64 with a JSON header sidecar."""
    path = str(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    f.data.astype("<f8").tofile(path)
    header = {"n": f.grid.n, "L": f.grid.L, "N": f.grid.N}
    with open(path + ".json", "w") as fh:
        json.dump(header, fh, indent=2)


def read_field(path):
    path = str(path)
    with open(path + ".json") as fh:
        header = json.load(fh)
    grid = GridSpec(n=header["n"], L=header["L"], N=header["N"])
    data = np.fromfile(path, dtype="<f8").reshape(grid.shape)
    return RealField(grid, data)


def axis_slice_csv(path, f, axis=0):
    """CSV of the field along one coordinate axis through the box center."""
    grid = f.grid
    idx = [grid.N // 2] * grid.n
    idx[axis] = slice(None)
    line = f.data[tuple(idx)]
    coords = grid.axis()
    with open(str(path), "w") as fh:
        fh.write("coordinate,value\n")
        for x, v in zip(coords, line):
            fh.write(f"{x:.17g},{v:.17g}\n")
