import math

import numpy as np
import pytest

from sector_hilbert.construction import (
    AREA_Q,
    ConstructionError,
    FrequencyError,
    SmoothingError,
    build,
    certify,
    child_mask,
    choose_frequency,
    cubic_profile,
    default_kernel,
    occupied_radius,
    smooth_indicator,
)
from sector_hilbert.experiment import build_sectors, direction_generators, extremal_function, node_sector_indices
from sector_hilbert.grid import forward, lp_norm, make_grid
from sector_hilbert.io import read_state, write_state
from sector_hilbert.spectral import Direction, Sector


# ---------------------------------------------------------------- kernel


def triangle_self_convolution(t, n=200001):
    """Numerical (1 - |s|/(1/2))_+ * itself, normalised to 1 at 0."""
    s = np.linspace(-0.5, 0.5, n)
    tri = np.maximum(0.0, 1 - np.abs(s) / 0.5)
    ds = s[1] - s[0]
    shifted = np.maximum(0.0, 1 - np.abs(t - s) / 0.5)
    at0 = np.sum(tri * tri) * ds
    return np.sum(tri * shifted) * ds / at0


@pytest.mark.parametrize("t", [0.0, 0.1, 0.25, 0.5, 0.7, 0.9, 1.0, 1.2])
def test_profile_matches_triangle_convolution(t):
    assert cubic_profile(t) == pytest.approx(triangle_self_convolution(t), abs=1e-6)


def test_profile_values():
    assert cubic_profile(0.0) == 1.0
    assert cubic_profile(0.5) == pytest.approx(0.25)
    assert cubic_profile(1.0) == 0.0
    assert cubic_profile(-0.3) == cubic_profile(0.3)


@pytest.mark.parametrize("l", [4, 8, 16])
def test_kernel_is_nonnegative_with_unit_mass(l):
    g = make_grid(128)
    k = default_kernel().spatial(g, l)
    assert k.values.min() > -1e-12 * k.values.max()
    assert k.values.sum() * g.cell_area == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- smoothing


def test_smoothing_whole_square_is_exact():
    g = make_grid(64)
    E = np.ones((64, 64), bool)
    gfun, l = smooth_indicator(g, E, 1e-12)
    assert np.max(np.abs(gfun.values - 1)) < 1e-13
    assert l == 8


def test_smoothing_half_plane_meets_eps():
    g = make_grid(128)
    X, _ = g.mesh
    E = X >= 0
    eps = 0.3 * math.sqrt(AREA_Q)
    gfun, l = smooth_indicator(g, E, eps)
    assert lp_norm(gfun - E.astype(float), 2) <= eps
    assert gfun.values.min() >= -1e-12 and gfun.values.max() <= 1 + 1e-12
    assert occupied_radius(gfun) <= (l - 1) * math.sqrt(2) + 1e-9


def test_smoothing_unreachable_eps_raises():
    g = make_grid(64)
    X, _ = g.mesh
    with pytest.raises(SmoothingError):
        smooth_indicator(g, X >= 0, 1e-9)


def test_smoothing_rejects_bad_input():
    g = make_grid(16)
    with pytest.raises(ValueError):
        smooth_indicator(g, np.zeros((16, 16), bool), 0.1)
    with pytest.raises(ValueError):
        smooth_indicator(g, np.ones((16, 16), bool), 0.0)


# ---------------------------------------------------------------- frequency choice


def test_choose_frequency_lands_in_sector():
    g = make_grid(256)
    S = Sector(Direction(0.5), Direction(1.2))
    E = np.ones((256, 256), bool)
    gfun, l = smooth_indicator(g, E, 0.1)
    p, q = choose_frequency(gfun, E, S, l)
    assert S.interior(p, q)
    assert S.distance_to_boundary(p, q) >= occupied_radius(gfun) + 1


def test_choose_frequency_narrow_sector_fails():
    g = make_grid(64)
    S = Sector(Direction(0.70), Direction(0.71))
    X, _ = g.mesh
    E = X >= 0
    gfun, l = smooth_indicator(g, E, 0.5 * math.sqrt(AREA_Q))
    with pytest.raises(FrequencyError):
        choose_frequency(gfun, E, S, l)


# ---------------------------------------------------------------- build / certify


def construct(m, R, eps, kind="uniform"):
    U = direction_generators(kind, 2**m)
    return extremal_function(U, make_grid(R), eps)


def test_depth_one_is_a_single_wave():
    f, state = construct(1, 128, 0.02)
    (node,) = state.nodes
    assert node.E.all()
    assert np.max(np.abs(node.g.values - 1)) < 1e-12
    assert lp_norm(f, 2) == pytest.approx(math.sqrt(AREA_Q))
    report = certify(state)
    assert report.passed, report.failures()


@pytest.mark.parametrize("m", [2, 3])
def test_feasible_build_certifies(m):
    f, state = construct(m, 512, 0.5)
    assert len(state.nodes) == 2**m - 1
    report = certify(state)
    assert report.passed, report.failures()
    ids = {r.check_id for r in report.rows}
    assert {"a_partition", "b_eps", "c_containment", "d_oscillation", "c1", "level_sum", "cap",
            "l1_mass", "tree_system"} <= ids
    # Every sample sits in exactly m of the sets E_n.
    count = sum(nd.E.astype(int) for nd in state.nodes)
    assert np.all(count == m)


def test_children_partition_parent():
    _, state = construct(3, 512, 0.5)
    for n in range(1, 4):
        E = state.node(n).E
        left, right = state.node(2 * n).E, state.node(2 * n + 1).E
        assert not np.any(left & right)
        assert not np.any((left | right) & ~E)
        assert np.count_nonzero(left | right) >= 0.999 * np.count_nonzero(E)
        assert np.array_equal(child_mask(state.grid, state.node(n), 2 * n), left)


def test_node_spectra_are_inside_their_sectors():
    _, state = construct(2, 512, 0.5)
    XI, ETA = state.grid.frequency_mesh
    for nd in state.nodes:
        c = np.abs(forward(nd.f).coeffs)
        occ = c > 1e-12 * c.max()
        assert np.all(state.node_sectors[nd.n - 1].interior(XI[occ], ETA[occ]))


def test_tight_eps_fails_with_node_index():
    with pytest.raises(ConstructionError) as info:
        construct(3, 256, 0.02)
    assert info.value.node is not None and info.value.node >= 2


def test_build_argument_checks():
    g = make_grid(64)
    sectors = build_sectors(direction_generators("uniform", 4))
    with pytest.raises(ValueError):
        build(0, 0.1, [], g)
    with pytest.raises(ValueError):
        build(2, -1.0, sectors, g)
    with pytest.raises(ValueError):
        build(2, 0.1, sectors[:2], g)


def test_node_sector_assignment_reverses_sigma():
    assert node_sector_indices(2) == (2, 3, 1)
    assert node_sector_indices(3) == (4, 6, 2, 7, 5, 3, 1)


def test_state_round_trip(tmp_path):
    _, state = construct(2, 512, 0.5)
    path = tmp_path / "state.txt"
    write_state(path, state)
    loaded = read_state(path, sectors=state.node_sectors)
    assert [r["n"] for r in loaded["nodes"]] == [1, 2, 3]
    again = loaded["state"]
    for a, b in zip(state.nodes, again.nodes):
        assert (a.p, a.q, a.l) == (b.p, b.q, b.l)
        assert np.array_equal(a.E, b.E)
        assert np.array_equal(a.g.values, b.g.values)
        assert np.array_equal(a.f.values, b.f.values)
    assert certify(again).passed

    write_state(tmp_path / "light.txt", state, payload=False)
    light = read_state(tmp_path / "light.txt")
    assert light["arrays"] == {} and len(light["nodes"]) == 3
