"""Periodic sampling of functions on the square Q = [-pi, pi]^2.

Fields are stored as ``(R, R)`` arrays with axis 0 running over x and axis 1
over y.  Fourier coefficients use the synthesis convention

    f(x, y) = sum_{xi, eta} c(xi, eta) * exp(i (xi x + eta y)),

with integer frequencies in ``[-R/2, R/2)`` stored in FFT order.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

__all__ = [
    "Grid",
    "GridField",
    "SpectralField",
    "make_grid",
    "forward",
    "inverse",
    "lp_norm",
    "level_set_measure",
    "AREA_Q",
]

#: Lebesgue measure of Q.
AREA_Q = 4.0 * np.pi**2


def fft_workers() -> int:
    """Thread count for the 2-D transforms, capped by ``SECTOR_HILBERT_THREADS``."""
    try:
        return max(1, int(os.environ.get("SECTOR_HILBERT_THREADS", "1")))
    except ValueError:
        return 1


def _readonly(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform ``R x R`` grid over Q; sample (a, b) sits at (-pi + 2 pi a / R, -pi + 2 pi b / R)."""

    resolution: int

    def __post_init__(self):
        R = self.resolution
        if not isinstance(R, (int, np.integer)) or isinstance(R, bool):
            raise TypeError(f"resolution must be an integer, got {R!r}")
        if R < 8 or R & (R - 1):
            raise ValueError(f"resolution must be a power of two >= 8, got {R}")

    @property
    def n_points(self) -> int:
        return self.resolution**2

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.resolution

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def coords(self) -> np.ndarray:
        """1-D sample coordinates shared by both axes."""
        return _readonly(-np.pi + self.spacing * np.arange(self.resolution))

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.coords, self.coords, indexing="ij")
        return _readonly(X), _readonly(Y)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Integer frequencies in FFT order."""
        R = self.resolution
        return _readonly(np.fft.fftfreq(R, d=1.0 / R).astype(np.int64))

    @cached_property
    def frequency_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        XI, ETA = np.meshgrid(self.frequencies, self.frequencies, indexing="ij")
        return _readonly(XI), _readonly(ETA)

    @cached_property
    def _phase(self) -> np.ndarray:
        # (-1)^(xi + eta): moves the sample origin from 0 to -pi.  R/2 is even,
        # so the sign is the same for xi = R/2 and xi = -R/2.
        XI, ETA = self.frequency_mesh
        return _readonly(np.where((XI + ETA) % 2 == 0, 1.0, -1.0))

    def field(self, values) -> "GridField":
        return GridField(self, values)

    def sample(self, func) -> "GridField":
        """Sample ``func(X, Y)`` on the grid."""
        X, Y = self.mesh
        return GridField(self, np.broadcast_to(func(X, Y), X.shape))


def make_grid(R: int) -> Grid:
    """Grid with ``R`` samples per axis; ``R`` must be a power of two, at least 8."""
    return Grid(R)


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a (complex) function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        R = self.grid.resolution
        if v.size != R * R:
            raise ValueError(f"expected {R * R} samples, got {v.size}")
        v = v.reshape(R, R)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if not np.iscomplexobj(v):
            v = v.astype(np.float64)
        object.__setattr__(self, "values", _readonly(v))

    def _check(self, other):
        if isinstance(other, GridField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridField(self.grid, self.values + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridField(self.grid, self.values - self._check(other))

    def __rsub__(self, other):
        return GridField(self.grid, self._check(other) - self.values)

    def __mul__(self, other):
        return GridField(self.grid, self.values * self._check(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridField(self.grid, self.values / self._check(other))

    def __neg__(self):
        return GridField(self.grid, -self.values)

    def __abs__(self):
        return GridField(self.grid, np.abs(self.values))

    @property
    def real(self) -> "GridField":
        return GridField(self.grid, self.values.real)

    @property
    def imag(self) -> "GridField":
        return GridField(self.grid, self.values.imag)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a :class:`GridField`, in FFT order."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        R = self.grid.resolution
        if c.shape != (R, R):
            raise ValueError(f"expected coefficient array of shape {(R, R)}, got {c.shape}")
        object.__setattr__(self, "coeffs", _readonly(c))

    def coefficient(self, xi: int, eta: int) -> complex:
        """Coefficient of ``exp(i (xi x + eta y))``."""
        R = self.grid.resolution
        half = R // 2
        if not (-half <= xi < half and -half <= eta < half):
            raise IndexError(f"frequency ({xi}, {eta}) outside [-{half}, {half})^2")
        return complex(self.coeffs[xi % R, eta % R])

    def masked(self, mask) -> "SpectralField":
        return SpectralField(self.grid, np.where(mask, self.coeffs, 0.0))

    def scaled(self, multiplier) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * multiplier)


def forward(f: GridField) -> SpectralField:
    """Fourier coefficients such that :func:`inverse` reproduces ``f`` exactly."""
    g = f.grid
    c = scipy.fft.fft2(f.values, workers=fft_workers()) / g.n_points
    return SpectralField(g, c * g._phase)


def inverse(S: SpectralField) -> GridField:
    g = S.grid
    return GridField(g, scipy.fft.ifft2(S.coeffs * g._phase, workers=fft_workers()) * g.n_points)


def lp_norm(f: GridField, p: float) -> float:
    """Riemann-sum L^p(Q) norm, ``(sum |f|^p * cell_area)^(1/p)``."""
    if not p >= 1 or not np.isfinite(p):
        raise ValueError(f"p must lie in [1, inf), got {p}")
    a = np.abs(f.values)
    if p == 1:
        return float(a.sum() * f.grid.cell_area)
    if p == 2:
        return float(np.sqrt(np.vdot(a, a).real * f.grid.cell_area))
    return float((np.sum(a**p) * f.grid.cell_area) ** (1.0 / p))


def level_set_measure(f: GridField, lam: float) -> float:
    """Area of ``{|f| > lam}``, counted cell by cell."""
    if lam < 0:
        raise ValueError("threshold must be nonnegative")
    return float(np.count_nonzero(np.abs(f.values) > lam) * f.grid.cell_area)
