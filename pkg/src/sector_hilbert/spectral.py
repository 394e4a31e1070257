"""Fourier multipliers on the periodic grid: half-planes, sectors, directional
Hilbert transforms and their maximal operators.

The half-plane of a direction ``u = (cos t, sin t)`` is the closed set
``{(xi, eta): xi cos t + eta sin t >= 0}``; its critical line belongs to it, so
the Hilbert multiplier ``i sign(xi cos t + eta sin t)`` uses ``sign(0) = +1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .grid import Grid, GridField, forward, inverse

__all__ = [
    "Direction",
    "DirectionSet",
    "Sector",
    "half_plane_mask",
    "half_plane_projection",
    "directional_hilbert",
    "pv_quadrature_hilbert",
    "sector_projection",
    "maximal_hilbert",
    "maximal_halfplane",
]

# Relative slack for deciding that a lattice point lies on a critical line;
# cos/sin of a float angle are only accurate to a few ulps.
_LINE_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit vector ``(cos theta, sin theta)``."""

    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("angle must be finite")

    @classmethod
    def from_vector(cls, x: float, y: float) -> "Direction":
        if x == 0 and y == 0:
            raise ValueError("zero vector has no direction")
        return cls(math.atan2(y, x))

    @property
    def u(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))

    def dot(self, xi, eta):
        """``xi cos theta + eta sin theta`` with values within rounding of 0 snapped to 0."""
        c, s = self.u
        xi = np.asarray(xi, dtype=np.float64)
        eta = np.asarray(eta, dtype=np.float64)
        d = xi * c + eta * s
        scale = np.abs(xi) + np.abs(eta)
        return np.where(np.abs(d) <= _LINE_TOL * scale, 0.0, d)


class DirectionSet(Sequence[Direction]):
    """Directions with strictly increasing angles in the open interval (0, pi/2)."""

    def __init__(self, directions: Iterable[Direction | float]):
        dirs = tuple(d if isinstance(d, Direction) else Direction(float(d)) for d in directions)
        if not dirs:
            raise ValueError("direction set is empty")
        thetas = [d.theta for d in dirs]
        for t in thetas:
            if not 0.0 < t < math.pi / 2:
                raise ValueError(f"angle {t!r} outside (0, pi/2)")
        for a, b in zip(thetas, thetas[1:]):
            if not b > a:
                raise ValueError(f"angles must be strictly increasing ({a!r} then {b!r})")
        self._dirs = dirs

    @classmethod
    def from_angles(cls, angles: Iterable[float]) -> "DirectionSet":
        return cls(Direction(float(t)) for t in angles)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([d.theta for d in self._dirs])

    def __getitem__(self, i):
        return self._dirs[i]

    def __len__(self):
        return len(self._dirs)

    def __repr__(self):
        return f"DirectionSet({[round(d.theta, 6) for d in self._dirs]})"


@dataclass(frozen=True)
class Sector:
    """Closed frequency sector between the critical lines of two directions.

    Membership of ``(xi, eta)``: ``xi >= 0``, ``<(xi, eta), u_lo> >= 0`` and
    ``<(xi, eta), u_hi> <= 0``.  For ``0 < theta_lo < theta_hi < pi/2`` this
    is the cone of polar angles in ``[theta_lo - pi/2, theta_hi - pi/2]``.
    """

    lower: Direction
    upper: Direction

    def __post_init__(self):
        if not 0 < self.lower.theta < self.upper.theta < math.pi / 2:
            raise ValueError("sector needs 0 < theta_lo < theta_hi < pi/2")

    @property
    def width(self) -> float:
        return self.upper.theta - self.lower.theta

    @property
    def central_angle(self) -> float:
        """Polar angle of the ray bisecting the sector."""
        return 0.5 * (self.lower.theta + self.upper.theta) - math.pi / 2

    def contains(self, xi, eta):
        xi = np.asarray(xi)
        return (xi >= 0) & (self.lower.dot(xi, eta) >= 0) & (self.upper.dot(xi, eta) <= 0)

    def interior(self, xi, eta):
        xi = np.asarray(xi)
        return (xi > 0) & (self.lower.dot(xi, eta) > 0) & (self.upper.dot(xi, eta) < 0)

    def mask(self, grid: Grid) -> np.ndarray:
        return self.contains(*grid.frequency_mesh)

    def distance_to_boundary(self, xi: float, eta: float) -> float:
        """Euclidean distance from an interior point to the sector's two boundary rays."""
        r = math.hypot(xi, eta)
        ang = math.atan2(eta, xi)
        lo = self.lower.theta - math.pi / 2
        hi = self.upper.theta - math.pi / 2
        if not lo <= ang <= hi:
            return 0.0
        return r * math.sin(min(ang - lo, hi - ang))


def half_plane_mask(grid: Grid, u: Direction) -> np.ndarray:
    return u.dot(*grid.frequency_mesh) >= 0


def half_plane_projection(f: GridField, u: Direction) -> GridField:
    """Keep the Fourier coefficients in the closed half-plane of ``u``."""
    return inverse(forward(f).masked(half_plane_mask(f.grid, u)))


def _hilbert_multiplier(grid: Grid, u: Direction) -> np.ndarray:
    return np.where(half_plane_mask(grid, u), 1j, -1j)


def directional_hilbert(f: GridField, u: Direction) -> GridField:
    """Hilbert transform along ``u``: multiplier ``i sign(<(xi, eta), u>)``, ``sign(0) = +1``.

    Equals ``i (2 T f - f)`` with ``T`` the half-plane projection.
    """
    return inverse(forward(f).scaled(_hilbert_multiplier(f.grid, u)))


def pv_quadrature_hilbert(
    f: GridField, u: Direction, truncation: float, step: float
) -> GridField:
    """Hilbert transform along ``u`` by truncated principal-value quadrature.

    Computes ``(1/pi) * sum_i step * (f(x + t_i u) - f(x - t_i u)) / t_i`` over
    the midpoints ``t_i = (i + 1/2) step`` of ``(0, truncation]``.  Off-grid
    values of ``f`` come from its trigonometric interpolant, so the shifted
    samples are evaluated mode by mode: each occupied mode ``k`` picks up the
    factor ``(2i/pi) sum_i step * sin(<k, u> t_i) / t_i``.  This is an
    independent check of :func:`directional_hilbert`; it never uses the sign
    multiplier.  ``step`` must divide ``truncation``.
    """
    if not truncation > 0 or not step > 0:
        raise ValueError("truncation and step must be positive")
    n_nodes = truncation / step
    M = int(round(n_nodes))
    if M < 1 or abs(n_nodes - M) > 1e-9 * max(1.0, n_nodes):
        raise ValueError("step must divide truncation")

    spec = forward(f)
    c = spec.coeffs
    mag = np.abs(c.ravel())
    if not mag.any():
        return GridField(f.grid, np.zeros_like(c))
    # Rounding-level coefficients are dropped; they cannot move a 1e-10 comparison.
    occupied = np.flatnonzero(mag > 1e-14 * mag.max())
    if occupied.size == 0:
        return GridField(f.grid, np.zeros_like(c))

    XI, ETA = f.grid.frequency_mesh
    cu, su = u.u
    omega = XI.ravel()[occupied] * cu + ETA.ravel()[occupied] * su
    # Modes sharing an along-direction frequency share a quadrature sum.
    omega_r = np.round(omega, 12)
    uniq, inv = np.unique(omega_r, return_inverse=True)

    t = (np.arange(M) + 0.5) * step
    w = step / t
    sums = np.empty(uniq.size)
    chunk = max(1, 2**22 // M)
    for lo in range(0, uniq.size, chunk):
        blk = uniq[lo : lo + chunk]
        sums[lo : lo + chunk] = np.sin(np.outer(blk, t)) @ w

    factor = np.zeros(c.size, dtype=np.complex128)
    factor[occupied] = (2j / np.pi) * sums[inv]
    return inverse(spec.scaled(factor.reshape(c.shape)))


def sector_projection(f: GridField, S: Sector) -> GridField:
    """Keep the Fourier coefficients inside the closed sector ``S``."""
    return inverse(forward(f).masked(S.mask(f.grid)))


def maximal_hilbert(f: GridField, U: Iterable[Direction]) -> GridField:
    """Pointwise ``max_{u in U} |H_u f|``."""
    spec = forward(f)
    out = np.zeros(f.values.shape)
    for u in U:
        h = inverse(spec.scaled(_hilbert_multiplier(f.grid, u)))
        np.maximum(out, np.abs(h.values), out=out)
    return GridField(f.grid, out)


def maximal_halfplane(f: GridField, U: Iterable[Direction]) -> GridField:
    """Pointwise ``max_{u in U} |T_u f|`` with ``T_u`` the half-plane projection."""
    spec = forward(f)
    out = np.zeros(f.values.shape)
    for u in U:
        t = inverse(spec.masked(half_plane_mask(f.grid, u)))
        np.maximum(out, np.abs(t.values), out=out)
    return GridField(f.grid, out)
