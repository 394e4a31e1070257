"""Growth of the maximal half-plane and directional Hilbert operators on the
extremal witness built from a direction set.

Orientation note.  With ``0 < theta_1 < ... < theta_N < pi/2`` and sectors
``S_k`` between the critical lines of ``u_k`` and ``u_{k+1}``, sector ``S_k``
lies in the half-plane of ``u_l`` exactly when ``l <= k``.  Hence

    T_{u_l} f = sum_{k >= l} T_{S_k} f,

a *suffix* sum in sector order.  To make ``T_U f`` equal the maximal partial
sum of the node fields in sigma order, node ``sigma(i)`` is placed in sector
``S_{nu + 1 - i}``; then the suffix starting at ``S_l`` is the sigma-prefix of
length ``nu + 1 - l``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .construction import ConstructionError, ConstructionState, SmoothingKernel, build
from .grid import Grid, GridField, forward, inverse, level_set_measure, lp_norm, make_grid
from .spectral import Direction, DirectionSet, Sector, half_plane_mask, maximal_hilbert
from .tree import sorting_permutation

__all__ = [
    "GrowthRecord",
    "GrowthTable",
    "build_sectors",
    "direction_generators",
    "read_direction_file",
    "node_sector_indices",
    "extremal_function",
    "halfplane_projections",
    "sector_suffix_maximum",
    "evaluate",
    "growth_sweep",
    "LEVEL_C3",
    "LEVEL_C2",
    "DualPathError",
]

# Empirical stand-ins for the unspecified absolute constants of the level-set
# estimate: threshold c3 * sqrt(log nu) * rms(f) and the area c2 it must exceed.
# rms(f) = ||f||_2 / sqrt|Q| makes the threshold scale-free.
LEVEL_C3 = 0.5
LEVEL_C2 = 0.25 * 4.0 * math.pi**2

DUAL_PATH_TOL = 1e-8
HILBERT_CACHE_TOL = 1e-10


class DualPathError(RuntimeError):
    """The two evaluations of ``T_U f`` disagree (a boundary-convention bug)."""


def build_sectors(U: DirectionSet) -> list[Sector]:
    """``N - 1`` sectors between consecutive critical lines; ``N`` must be a power of two."""
    N = len(U)
    if N < 2 or N & (N - 1):
        raise ValueError(f"need N = 2**m >= 2 directions, got {N}")
    return [Sector(U[k], U[k + 1]) for k in range(N - 1)]


def read_direction_file(path) -> DirectionSet:
    """One angle in radians per line; blank lines and ``#`` comments ignored."""
    angles = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            angles.append(float(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not an angle: {line!r}") from None
    return DirectionSet.from_angles(angles)


def direction_generators(kind: str, N: int, path=None) -> DirectionSet:
    """``uniform``: ``theta_k = (pi/2) k / (N + 1)``; ``lacunary``:
    ``theta_k = (pi/4) 2**-(N-k)``; ``file``: angles read from ``path``."""
    if kind == "file":
        if path is None:
            raise ValueError("file directions need a path")
        U = read_direction_file(path)
        if len(U) != N:
            raise ValueError(f"{path}: expected {N} angles, found {len(U)}")
        return U
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    k = np.arange(1, N + 1)
    if kind == "uniform":
        return DirectionSet.from_angles(0.5 * math.pi * k / (N + 1))
    if kind == "lacunary":
        return DirectionSet.from_angles(0.25 * math.pi * 2.0 ** (k - N))
    raise ValueError(f"unknown direction kind {kind!r}")


def node_sector_indices(m: int) -> tuple[int, ...]:
    """Sector (1-based) hosting each node: node ``sigma(i)`` goes to ``S_{nu+1-i}``."""
    sigma = sorting_permutation(m)
    nu = len(sigma)
    return tuple(nu + 1 - sigma.inv(n) for n in range(1, nu + 1))


def extremal_function(
    U: DirectionSet, grid: Grid, eps: float, kernel: SmoothingKernel | None = None
) -> tuple[GridField, ConstructionState]:
    """Witness ``f = sum_n f_n`` for the direction set ``U`` (``eps`` in units of ``sqrt|Q|``)."""
    sectors = build_sectors(U)
    m = int(math.log2(len(U)))
    idx = node_sector_indices(m)
    state = build(m, eps, [sectors[i - 1] for i in idx], grid, kernel, sector_indices=idx)
    return state.total(), state


def halfplane_projections(f: GridField, U: Iterable[Direction]) -> list[GridField]:
    spec = forward(f)
    return [inverse(spec.masked(half_plane_mask(f.grid, u))) for u in U]


def sector_suffix_maximum(f: GridField, sectors: Sequence[Sector]) -> GridField:
    """``max_l |sum_{k >= l} T_{S_k} f|``: the sector route to ``T_U f``."""
    spec = forward(f)
    running = np.zeros(f.values.shape, dtype=np.complex128)
    best = np.zeros(f.values.shape)
    for S in reversed(sectors):
        running += inverse(spec.masked(S.mask(f.grid))).values
        np.maximum(best, np.abs(running), out=best)
    return GridField(f.grid, best)


def _rel_l2(a: GridField, b: GridField) -> float:
    den = lp_norm(b, 2)
    diff = lp_norm(a - b, 2)
    return diff / den if den > 0 else diff


@dataclass
class GrowthRecord:
    m: int
    N: int
    R: int
    eps: float
    ratio_T: float
    ratio_H: dict[float, float]
    level_measure: float
    level_threshold: float
    dual_path_error: float
    hilbert_cache_error: float
    wall_time: float = 0.0
    status: str = "ok"
    message: str = ""
    T_U: GridField | None = field(default=None, repr=False)

    @property
    def nu(self) -> int:
        return self.N - 1

    @property
    def ratio_over_sqrtlog(self) -> float:
        if self.nu < 2 or not math.isfinite(self.ratio_T):
            return math.nan
        return self.ratio_T / math.sqrt(math.log(self.nu))

    @classmethod
    def failed(cls, m, R, eps, ps, message, wall_time=0.0):
        nan = math.nan
        return cls(m, 2**m, R, eps, nan, {p: nan for p in ps}, nan, nan, nan, nan,
                   wall_time, "failed", message)


def evaluate(
    f: GridField,
    U: DirectionSet,
    state: ConstructionState | None = None,
    ps: Sequence[float] = (1.0, 2.0),
    c3: float = LEVEL_C3,
    eps: float | None = None,
) -> GrowthRecord:
    """Measure ``T_U f`` two ways, ``H_U f``, and the level set of ``T_U f``.

    Raises :class:`DualPathError` if the half-plane and sector evaluations of
    ``T_U f`` differ by more than ``1e-8`` in relative L^2.
    """
    t0 = time.perf_counter()
    grid = f.grid
    sectors = build_sectors(U)
    projections = halfplane_projections(f, U)
    direct = np.zeros(f.values.shape)
    for t in projections:
        np.maximum(direct, np.abs(t.values), out=direct)
    T_U = GridField(grid, direct)
    via_sectors = sector_suffix_maximum(f, sectors)
    dual = _rel_l2(via_sectors, T_U)
    if not dual <= DUAL_PATH_TOL:
        raise DualPathError(f"half-plane and sector routes to T_U f differ by {dual:.3e}")

    H_U = maximal_hilbert(f, U)
    cached = np.zeros(f.values.shape)
    for t in projections:
        np.maximum(cached, np.abs(2.0 * t.values - f.values), out=cached)
    cache_err = _rel_l2(GridField(grid, cached), H_U)
    if not cache_err <= HILBERT_CACHE_TOL:
        raise DualPathError(f"H_U f disagrees with i(2T - 1) on cached projections ({cache_err:.3e})")

    norm_f = lp_norm(f, 2)
    N = len(U)
    m = int(math.log2(N))
    nu = N - 1
    rms = norm_f / math.sqrt(grid.cell_area * grid.n_points)
    threshold = c3 * math.sqrt(math.log(nu)) * rms if nu > 1 else 0.0
    return GrowthRecord(
        m=m,
        N=N,
        R=grid.resolution,
        eps=state.eps if state is not None else (eps if eps is not None else math.nan),
        ratio_T=lp_norm(T_U, 1) / norm_f,
        ratio_H={p: lp_norm(H_U, p) / norm_f for p in ps},
        level_measure=level_set_measure(T_U, threshold),
        level_threshold=threshold,
        dual_path_error=dual,
        hilbert_cache_error=cache_err,
        wall_time=time.perf_counter() - t0,
        T_U=T_U,
    )


@dataclass
class GrowthTable:
    records: list[GrowthRecord]
    ps: tuple[float, ...]
    kind: str = "uniform"

    @property
    def ok(self) -> list[GrowthRecord]:
        return [r for r in self.records if r.status == "ok"]

    @property
    def all_ok(self) -> bool:
        return all(r.status == "ok" for r in self.records)

    def slope(self) -> float:
        """Least-squares slope of ``ratio_T**2`` against ``log nu`` over rows with ``nu >= 2``."""
        pts = [(math.log(r.nu), r.ratio_T**2) for r in self.ok if r.nu >= 2]
        if len(pts) < 2:
            return math.nan
        x, y = np.array(pts).T
        return float(np.polyfit(x, y, 1)[0])


def growth_sweep(
    m_range: Iterable[int],
    R: int,
    eps: float,
    kind: str = "uniform",
    ps: Sequence[float] = (1.0, 2.0),
    path=None,
    kernel: SmoothingKernel | None = None,
    c3: float = LEVEL_C3,
) -> GrowthTable:
    """One :class:`GrowthRecord` per depth; failures are recorded and the sweep continues."""
    grid = make_grid(R)
    records = []
    ps = tuple(float(p) for p in ps)
    for m in m_range:
        t0 = time.perf_counter()
        try:
            U = direction_generators(kind, 2**m, path)
            f, state = extremal_function(U, grid, eps, kernel)
            rec = evaluate(f, U, state, ps, c3)
        except (ConstructionError, DualPathError, ValueError) as exc:
            rec = GrowthRecord.failed(m, R, eps, ps, str(exc))
        rec.wall_time = time.perf_counter() - t0
        records.append(rec)
    return GrowthTable(records, ps, kind)
