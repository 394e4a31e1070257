"""Inductive construction of spectrally localized functions whose real parts,
cut to nested sign sets, form a tree-system.

For each node ``n`` (heap order, parents first):

* ``E_1 = Q`` and ``E_n = {x in E_parent : child_sign(n) cos(p_parent x + q_parent y) > 0}``;
* ``g_n = Phi_l(1_{E_n})`` is a band-limited smoothing with ``0 <= g_n <= 1``;
* ``(p_n, q_n)`` is a lattice point deep enough inside the node's sector that
  ``exp(i(p_n x + q_n y)) g_n`` has its whole spectrum in the sector, and with
  ``int_{E_n} |cos(p_n x + q_n y)| > |E_n| / 3``;
* ``f_n = exp(i(p_n x + q_n y)) g_n / sqrt(m)`` and ``f~_n = Re(f_n) 1_{E_n}``.

Tolerances ``eps`` passed to :func:`build` are in units of ``sqrt(|Q|) = 2 pi``;
:func:`smooth_indicator` takes an absolute L^2 tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import AREA_Q, Grid, GridField, SpectralField, forward, inverse, lp_norm
from .spectral import Sector
from .tree import (
    Permutation,
    child_sign,
    double_index,
    maximal_partial_sum,
    parent,
    sorting_permutation,
    verify_tree_system,
)

__all__ = [
    "ConstructionError",
    "SmoothingError",
    "FrequencyError",
    "SmoothingKernel",
    "default_kernel",
    "cubic_profile",
    "smooth_indicator",
    "choose_frequency",
    "occupied_radius",
    "ConstructionNode",
    "ConstructionState",
    "build",
    "CheckRow",
    "CertifyReport",
    "certify",
]

SQRT_AREA_Q = math.sqrt(AREA_Q)
# Coefficients below this fraction of the peak count as unoccupied.
SPECTRAL_FLOOR = 1e-12


class ConstructionError(RuntimeError):
    """Raised when a node cannot be built; ``node`` is the failing heap index."""

    def __init__(self, message, node=None):
        super().__init__(message if node is None else f"node {node}: {message}")
        self.node = node


class SmoothingError(ConstructionError):
    pass


class FrequencyError(ConstructionError):
    pass


def cubic_profile(t):
    """Self-convolution of a triangle, normalized to 1 at the origin.

    Piecewise cubic, even, supported in ``[-1, 1]``::

        1 - 6 t^2 + 6 |t|^3    for |t| <= 1/2
        2 (1 - |t|)^3          for 1/2 <= |t| <= 1

    It is the Fourier transform of a multiple of ``(sin(x/4) / (x/4))**4``,
    a nonnegative kernel of unit mass.
    """
    t = np.abs(np.asarray(t, dtype=np.float64))
    inner = 1.0 - 6.0 * t**2 + 6.0 * t**3
    outer = 2.0 * (1.0 - t) ** 3
    return np.where(t <= 0.5, inner, np.where(t < 1.0, outer, 0.0))


@dataclass(frozen=True)
class SmoothingKernel:
    """Tensor-product smoothing with spectral profile ``profile``; ``Phi_l`` multiplies
    coefficient ``(xi, eta)`` by ``profile(xi / l) * profile(eta / l)``."""

    profile: Callable = cubic_profile
    name: str = "cubic"

    def multiplier(self, grid: Grid, l: int) -> np.ndarray:
        w = self.profile(grid.frequencies / l)
        return np.outer(w, w)

    def apply(self, f: GridField, l: int) -> GridField:
        return inverse(forward(f).scaled(self.multiplier(f.grid, l)))

    def spatial(self, grid: Grid, l: int) -> GridField:
        """Kernel samples ``k`` with ``Phi_l f(x) = sum_y k(x - y) f(y) * cell_area``.

        Returned on the grid centered at the origin, i.e. sample (a, b) holds
        ``k(-pi + 2 pi a / R, -pi + 2 pi b / R)``.
        """
        spec = SpectralField(grid, self.multiplier(grid, l).astype(np.complex128) / AREA_Q)
        return inverse(spec).real


def default_kernel() -> SmoothingKernel:
    return SmoothingKernel()


#: First smoothing scale tried; 8 = R/64 at R = 512, kept fixed so that the
#: construction does not change when the grid is refined.
L_MIN = 8


def _doubling_scales(R: int, l_min: int = L_MIN):
    l = max(1, min(l_min, R // 2))
    while l <= R // 2:
        yield l
        l *= 2


def smooth_indicator(
    grid: Grid, E: np.ndarray, eps: float, kernel: SmoothingKernel | None = None
) -> tuple[GridField, int]:
    """Smallest ``l`` in ``8, 16, ..., R/2`` with ``||Phi_l(1_E) - 1_E||_2 <= eps``.

    Raises :class:`SmoothingError` when even ``l = R/2`` misses ``eps``.
    """
    kernel = kernel or default_kernel()
    E = np.asarray(E, dtype=bool)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not E.any():
        raise ValueError("E is empty")
    ind = GridField(grid, E.astype(np.float64))
    spec = forward(ind)
    best = math.inf
    for l in _doubling_scales(grid.resolution):
        g = inverse(spec.scaled(kernel.multiplier(grid, l))).real
        err = lp_norm(g - ind, 2)
        best = min(best, err)
        if err <= eps:
            return g, l
    raise SmoothingError(
        f"no l <= {grid.resolution // 2} reaches ||g - 1_E|| <= {eps:.3g} "
        f"(best {best:.3g}); increase the resolution or eps"
    )


def occupied_radius(g: GridField) -> float:
    """Largest ``|(xi, eta)|`` among coefficients of ``g`` above the spectral floor."""
    c = np.abs(forward(g).coeffs)
    occ = c > SPECTRAL_FLOOR * c.max()
    XI, ETA = g.grid.frequency_mesh
    return float(np.sqrt((XI[occ] ** 2 + ETA[occ] ** 2).max()))


def _cos_phase(grid: Grid, p: int, q: int) -> np.ndarray:
    X, Y = grid.mesh
    return np.cos(p * X + q * Y)


def _abs_cos_mass(grid: Grid, E: np.ndarray, p: int, q: int) -> tuple[float, float]:
    c = np.abs(_cos_phase(grid, p, q))
    return float(c[E].sum() * grid.cell_area), float(np.count_nonzero(E) * grid.cell_area)


def choose_frequency(
    g: GridField, E: np.ndarray, S: Sector, l: int | None = None
) -> tuple[int, int]:
    """Lattice point ``(p, q)`` on the central ray of ``S`` meeting both node conditions.

    Containment: the disk of radius ``r + 1`` around ``(p, q)`` lies in ``S``,
    where ``r`` is the occupied spectral radius of ``g`` (at most
    ``(l - 1) sqrt 2`` when ``g`` was smoothed at scale ``l``), and the shifted
    spectrum stays inside the Nyquist box.  Oscillation: grid quadrature gives
    ``int_E |cos(p x + q y)| > |E| / 3``.  The radius starts at the smallest
    value allowing containment and doubles until the oscillation condition
    holds; :class:`FrequencyError` once it would pass ``R / 4``.
    """
    grid = g.grid
    R = grid.resolution
    E = np.asarray(E, dtype=bool)
    r = occupied_radius(g)
    if l is not None:
        r = min(r, (l - 1) * math.sqrt(2.0))
    margin = r + 1.0
    half_width = 0.5 * S.width
    limit = R / 4
    rho = margin / math.sin(half_width)
    ca, sa = math.cos(S.central_angle), math.sin(S.central_angle)

    def fits(p, q):
        return (
            S.distance_to_boundary(p, q) >= margin
            and abs(p) + r < R / 2
            and abs(q) + r < R / 2
        )

    while rho <= limit:
        # Walk outward along the ray in half-unit steps to the first lattice
        # point clearing the margin; rounding can cost up to sqrt(2)/2.
        point = None
        t = rho
        while t <= min(2 * rho, limit) + 1e-9:
            p, q = int(round(t * ca)), int(round(t * sa))
            if math.hypot(p, q) <= limit and fits(p, q):
                point = (p, q)
                break
            t += 0.5
        if point is None:
            break
        mass, area = _abs_cos_mass(grid, E, *point)
        if mass > area / 3:
            return point
        rho *= 2
    raise FrequencyError(
        f"no lattice point with |(p, q)| <= R/4 = {limit:g} clears a margin of "
        f"{margin:.3g} in a sector of width {S.width:.3g} rad"
    )


@dataclass(frozen=True, eq=False)
class ConstructionNode:
    n: int
    k: int
    j: int
    sector_index: int
    E: np.ndarray
    g: GridField
    l: int
    p: int
    q: int
    eps_achieved: float  # ||g - 1_E||_2 / sqrt|Q|
    f: GridField
    f_tilde: GridField


@dataclass(eq=False)
class ConstructionState:
    """Everything :func:`build` produced; ``node_sectors[n-1]`` is the sector of node ``n``."""

    m: int
    eps: float
    grid: Grid
    node_sectors: tuple[Sector, ...]
    nodes: list[ConstructionNode]
    kernel: SmoothingKernel = field(default_factory=default_kernel)
    sector_indices: tuple[int, ...] | None = None

    @property
    def nu(self) -> int:
        return 2**self.m - 1

    @property
    def eps_abs(self) -> float:
        return self.eps * SQRT_AREA_Q

    @property
    def sigma(self) -> Permutation:
        return sorting_permutation(self.m)

    def node(self, n: int) -> ConstructionNode:
        return self.nodes[n - 1]

    def fields(self) -> list[GridField]:
        return [nd.f for nd in self.nodes]

    def tilde_fields(self) -> list[GridField]:
        return [nd.f_tilde for nd in self.nodes]

    def total(self) -> GridField:
        acc = np.zeros((self.grid.resolution,) * 2, dtype=np.complex128)
        for nd in self.nodes:
            acc += nd.f.values
        return GridField(self.grid, acc)


def _lattice_overlap(grid: Grid, sectors: Sequence[Sector]) -> list[tuple[int, int]]:
    XI, ETA = grid.frequency_mesh
    masks = [S.interior(XI, ETA) for S in sectors]
    clashes = []
    for a in range(len(masks)):
        for b in range(a + 1, len(masks)):
            if np.any(masks[a] & masks[b]):
                clashes.append((a + 1, b + 1))
    return clashes


def make_node(
    grid: Grid,
    n: int,
    m: int,
    E: np.ndarray,
    sector: Sector,
    eps_abs: float,
    kernel: SmoothingKernel,
    sector_index: int = 0,
) -> ConstructionNode:
    k, j = double_index(n)
    try:
        g, l = smooth_indicator(grid, E, eps_abs, kernel)
        p, q = choose_frequency(g, E, sector, l)
    except ConstructionError as exc:
        raise type(exc)(str(exc), node=n) from None
    ind = GridField(grid, E.astype(np.float64))
    X, Y = grid.mesh
    scale = 1.0 / math.sqrt(m)
    f = GridField(grid, np.exp(1j * (p * X + q * Y)) * g.values * scale)
    f_tilde = GridField(grid, f.values.real * E)
    return ConstructionNode(
        n=n,
        k=k,
        j=j,
        sector_index=sector_index,
        E=E,
        g=g,
        l=l,
        p=p,
        q=q,
        eps_achieved=lp_norm(g - ind, 2) / SQRT_AREA_Q,
        f=f,
        f_tilde=f_tilde,
    )


def child_mask(grid: Grid, parent_node: ConstructionNode, n: int) -> np.ndarray:
    """``E_n`` from its parent's set and frequency (strict sign, so siblings never overlap)."""
    cos = _cos_phase(grid, parent_node.p, parent_node.q)
    return parent_node.E & (child_sign(n) * cos > 0)


def build(
    m: int,
    eps: float,
    node_sectors: Sequence[Sector],
    grid: Grid,
    kernel: SmoothingKernel | None = None,
    sector_indices: Sequence[int] | None = None,
) -> ConstructionState:
    """Build all ``2**m - 1`` nodes, parents before children.

    ``node_sectors[n-1]`` is the sector node ``n`` must live in; ``eps`` bounds
    ``||g_n - 1_{E_n}||_2`` in units of ``sqrt|Q|``.  The first node that cannot
    be built raises a :class:`ConstructionError` carrying its index.
    """
    if m < 1:
        raise ValueError("depth must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    nu = 2**m - 1
    node_sectors = tuple(node_sectors)
    if len(node_sectors) != nu:
        raise ValueError(f"need {nu} sectors for depth {m}, got {len(node_sectors)}")
    clashes = _lattice_overlap(grid, node_sectors)
    if clashes:
        raise ValueError(f"sectors overlap on the frequency lattice: {clashes[:5]}")
    kernel = kernel or default_kernel()
    idx = tuple(sector_indices) if sector_indices is not None else tuple(range(1, nu + 1))

    eps_abs = eps * SQRT_AREA_Q
    R = grid.resolution
    nodes: list[ConstructionNode] = []
    for n in range(1, nu + 1):
        if n == 1:
            E = np.ones((R, R), dtype=bool)
        else:
            E = child_mask(grid, nodes[parent(n) - 1], n)
            if not E.any():
                raise ConstructionError("empty set E_n", node=n)
        nodes.append(make_node(grid, n, m, E, node_sectors[n - 1], eps_abs, kernel, idx[n - 1]))
    return ConstructionState(m, eps, grid, node_sectors, nodes, kernel, idx)


@dataclass(frozen=True)
class CheckRow:
    check_id: str
    node: int  # 0 for whole-system checks
    value: float
    bound: float
    passed: bool


@dataclass
class CertifyReport:
    rows: list[CheckRow]
    c1: float
    tree_ok: bool

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.passed]

    def value(self, check_id: str, node: int = 0) -> float:
        for r in self.rows:
            if r.check_id == check_id and r.node == node:
                return r.value
        raise KeyError((check_id, node))


# Pinned bounds for the whole-system checks.
C1_BOUND = 10.0 * AREA_Q
L1_FLOOR = 0.1
PARTITION_FRACTION = 0.999
CAP_SLACK = 1e-9
RANGE_SLACK = 1e-12


def certify(state: ConstructionState, delta_threshold: float = 1.0) -> CertifyReport:
    """Machine-check every node condition and the system-level estimates.

    Check ids:

    ``a_partition``   children split the parent set (node rows, value = overlap + leak cells)
    ``b_range``       min and max of ``g_n`` within ``[0, 1]`` (value = worst excursion)
    ``b_eps``         ``||g_n - 1_{E_n}||_2 <= eps sqrt|Q|``
    ``c_containment`` occupied coefficients of ``f_n`` outside its sector (count)
    ``d_oscillation`` ``int_{E_n} |cos| / |E_n|`` against ``1/3``
    ``tilde_gap``     ``||f~_n - Re f_n||_2 <= eps sqrt|Q| / sqrt m``
    ``c1``            ``sum ||f_n||_2^2 <= 10 |Q|``
    ``level_sum``     fraction of samples with ``sum 1_{E_n} = m``, at least 0.999
    ``delta_set``     area of ``{sum |f~_j - Re f_j| > delta_threshold}`` (reported, bound |Q|)
    ``tree_system``   support inclusions of ``{f~_n}``
    ``cap``           ``max`` of the tilde partial-sum maximum against ``sqrt m``
    ``l1_mass``       ``int sum |f~_j|`` against ``0.1 sqrt(m) |Q|``
    """
    g = state.grid
    m = state.m
    rows: list[CheckRow] = []
    eps_abs = state.eps_abs
    XI, ETA = g.frequency_mesh

    for nd in state.nodes:
        n = nd.n
        if 2 * n <= state.nu:
            left, right = state.node(2 * n).E, state.node(2 * n + 1).E
            overlap = int(np.count_nonzero(left & right))
            leak = int(np.count_nonzero((left | right) & ~nd.E))
            rows.append(CheckRow("a_partition", n, overlap + leak, 0, overlap + leak == 0))

        gv = nd.g.values
        excursion = max(0.0, -float(gv.min()), float(gv.max()) - 1.0)
        rows.append(CheckRow("b_range", n, excursion, RANGE_SLACK, excursion <= RANGE_SLACK))
        err = nd.eps_achieved * SQRT_AREA_Q
        rows.append(CheckRow("b_eps", n, err, eps_abs, err <= eps_abs))

        coeffs = np.abs(forward(nd.f).coeffs)
        occ = coeffs > SPECTRAL_FLOOR * coeffs.max()
        sector = state.node_sectors[n - 1]
        outside = int(np.count_nonzero(occ & ~sector.interior(XI, ETA)))
        rows.append(CheckRow("c_containment", n, outside, 0, outside == 0))

        mass, area = _abs_cos_mass(g, nd.E, nd.p, nd.q)
        ratio = mass / area
        rows.append(CheckRow("d_oscillation", n, ratio, 1.0 / 3.0, ratio > 1.0 / 3.0))

        gap = lp_norm(nd.f_tilde - nd.f.real, 2)
        rows.append(CheckRow("tilde_gap", n, gap, eps_abs / math.sqrt(m), gap <= eps_abs / math.sqrt(m)))

    c1 = sum(lp_norm(nd.f, 2) ** 2 for nd in state.nodes)
    rows.append(CheckRow("c1", 0, c1, C1_BOUND, c1 <= C1_BOUND))

    count = np.zeros((g.resolution,) * 2, dtype=np.int64)
    for nd in state.nodes:
        count += nd.E
    frac = float(np.mean(count == m))
    rows.append(CheckRow("level_sum", 0, frac, PARTITION_FRACTION, frac >= PARTITION_FRACTION))

    gap_sum = np.zeros((g.resolution,) * 2)
    for nd in state.nodes:
        gap_sum += np.abs(nd.f_tilde.values - nd.f.values.real)
    delta = float(np.count_nonzero(gap_sum > delta_threshold) * g.cell_area)
    rows.append(CheckRow("delta_set", 0, delta, AREA_Q, delta <= AREA_Q))

    tilde = state.tilde_fields()
    tree = verify_tree_system(tilde)
    rows.append(CheckRow("tree_system", 0, len(tree.failed_nodes) + len(tree.descendant_failures), 0, tree.passed))

    mps = maximal_partial_sum(tilde, state.sigma).values
    cap = float(mps.max())
    rows.append(CheckRow("cap", 0, cap, math.sqrt(m) + CAP_SLACK, cap <= math.sqrt(m) + CAP_SLACK))

    abs_sum = np.zeros((g.resolution,) * 2)
    for f in tilde:
        abs_sum += np.abs(f.values)
    l1 = float(abs_sum.sum() * g.cell_area)
    floor = L1_FLOOR * math.sqrt(m) * AREA_Q
    rows.append(CheckRow("l1_mass", 0, l1, floor, l1 >= floor))

    return CertifyReport(rows, c1, tree.passed)
