"""Invariant suites run by ``sector-hilbert selftest``.

Every suite yields :class:`Row` objects; a suite passes when all its rows do.
The Hilbert implementation is injectable so that a corrupted multiplier can be
shown to trip the eigenrelation suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .grid import AREA_Q, SpectralField, forward, inverse, lp_norm, make_grid
from .spectral import Direction, directional_hilbert, pv_quadrature_hilbert
from .tree import maximal_partial_sum, random_tree_system, sorting_permutation, verify_tree_system

__all__ = ["Row", "run_all", "SUITES"]

SIGMA_M3 = (4, 2, 5, 1, 6, 3, 7)


@dataclass(frozen=True)
class Row:
    suite: str
    case: str
    value: float
    bound: float
    passed: bool


def _random_field(rng, grid):
    shape = (grid.resolution,) * 2
    return grid.field(rng.normal(size=shape) + 1j * rng.normal(size=shape))


def parseval(rng, R=64, trials=20) -> Iterator[Row]:
    g = make_grid(R)
    for t in range(trials):
        f = _random_field(rng, g)
        lhs = lp_norm(f, 2) ** 2
        rhs = AREA_Q * float(np.sum(np.abs(forward(f).coeffs) ** 2))
        err = abs(lhs - rhs) / lhs
        yield Row("parseval", f"R{R}_{t}", err, 1e-10, err <= 1e-10)


def roundtrip(rng, R=64, trials=20) -> Iterator[Row]:
    g = make_grid(R)
    for t in range(trials):
        f = _random_field(rng, g)
        err = lp_norm(inverse(forward(f)) - f, 2) / lp_norm(f, 2)
        yield Row("roundtrip", f"R{R}_{t}", err, 1e-10, err <= 1e-10)


def eigenrelation(rng, R=64, trials=50, hilbert: Callable = directional_hilbert) -> Iterator[Row]:
    g = make_grid(R)
    X, Y = g.mesh
    half = R // 2
    for t in range(trials):
        p, q = (int(v) for v in rng.integers(-half + 1, half, size=2))
        u = Direction(float(rng.uniform(0, 2 * math.pi)))
        wave = g.field(np.exp(1j * (p * X + q * Y)))
        s = 1.0 if u.dot(p, q) >= 0 else -1.0
        err = lp_norm(hilbert(wave, u) - 1j * s * wave, 2) / lp_norm(wave, 2)
        yield Row("eigenrelation", f"({p},{q})@{u.theta:.6f}", err, 1e-10, err <= 1e-10)


def band_limited_field(rng, grid, u: Direction, band: int, gap: float = 1.0):
    """Random field with ``|xi|, |eta| <= band`` and ``|<(xi, eta), u>| >= gap``."""
    XI, ETA = grid.frequency_mesh
    keep = (np.abs(XI) <= band) & (np.abs(ETA) <= band) & (np.abs(u.dot(XI, ETA)) >= gap)
    shape = XI.shape
    c = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) * keep
    return inverse(SpectralField(grid, c))


def oracle(rng, R=64, trials=2, hilbert: Callable = directional_hilbert) -> Iterator[Row]:
    g = make_grid(R)
    for t in range(trials):
        u = Direction(float(rng.uniform(0, math.pi)))
        f = band_limited_field(rng, g, u, R // 8)
        ref = pv_quadrature_hilbert(f, u, 128 * math.pi, math.pi / 64)
        h = hilbert(f, u)
        err = lp_norm(h - ref, 2) / lp_norm(h, 2)
        yield Row("oracle", f"R{R}_{t}", err, 1e-3, err <= 1e-3)


def one_third(rng, systems=100, max_depth=6) -> Iterator[Row]:
    for t in range(systems):
        m = int(rng.integers(1, max_depth + 1))
        F = random_tree_system(rng, m, shape=(16, 16))
        ok_tree = verify_tree_system(F).passed
        M = maximal_partial_sum(list(F), sorting_permutation(m))
        total = np.abs(F).sum(axis=0)
        violations = int(np.count_nonzero(3 * M < total))
        yield Row("one_third", f"m{m}_{t}", violations, 0, ok_tree and violations == 0)


def permutation(rng=None) -> Iterator[Row]:
    got = sorting_permutation(3).order
    yield Row("permutation", "m3", 0 if got == SIGMA_M3 else 1, 0, got == SIGMA_M3)


SUITES = {
    "parseval": parseval,
    "roundtrip": roundtrip,
    "eigenrelation": eigenrelation,
    "oracle": oracle,
    "one_third": one_third,
    "permutation": permutation,
}


def run_all(seed: int = 0, hilbert: Callable = directional_hilbert) -> list[Row]:
    rows = []
    for i, (name, suite) in enumerate(SUITES.items()):
        rng = np.random.default_rng([seed, i])
        if name in ("eigenrelation", "oracle"):
            rows.extend(suite(rng, hilbert=hilbert))
        else:
            rows.extend(suite(rng))
    return rows
