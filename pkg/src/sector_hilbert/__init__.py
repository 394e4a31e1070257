"""Directional Hilbert transforms as Fourier multipliers on a periodic grid,
tree-systems with their dyadic rearrangement, and the extremal witness showing
``sqrt(log N)`` growth of the maximal directional Hilbert transform."""

__version__ = "0.1.0"

from .grid import (  # noqa: E402
    AREA_Q,
    Grid,
    GridField,
    SpectralField,
    forward,
    inverse,
    level_set_measure,
    lp_norm,
    make_grid,
)
from .spectral import (  # noqa: E402
    Direction,
    DirectionSet,
    Sector,
    directional_hilbert,
    half_plane_projection,
    maximal_halfplane,
    maximal_hilbert,
    pv_quadrature_hilbert,
    sector_projection,
)
from .tree import (  # noqa: E402
    double_index,
    dyadic_tag,
    maximal_partial_sum,
    sorting_permutation,
    split_index,
    verify_tree_system,
)
from .construction import (  # noqa: E402
    ConstructionError,
    build,
    certify,
    choose_frequency,
    default_kernel,
    smooth_indicator,
)
from .experiment import (  # noqa: E402
    build_sectors,
    direction_generators,
    evaluate,
    extremal_function,
    growth_sweep,
)
