import numpy as np

from sector_hilbert.grid import forward, inverse
from sector_hilbert.selftest import SUITES, run_all
from sector_hilbert.spectral import half_plane_mask


def test_all_suites_pass():
    rows = run_all(seed=0)
    assert {r.suite for r in rows} == set(SUITES)
    assert all(r.passed for r in rows), [r for r in rows if not r.passed][:5]


def test_one_third_suite_has_100_systems_and_no_violations():
    rows = [r for r in run_all(seed=7) if r.suite == "one_third"]
    assert len(rows) == 100
    assert sum(r.value for r in rows) == 0


def test_seed_changes_synthetic_data_only():
    a = run_all(seed=1)
    b = run_all(seed=1)
    assert a == b
    c = run_all(seed=2)
    assert [r.case for r in a if r.suite == "one_third"] != [r.case for r in c if r.suite == "one_third"]


def corrupted_hilbert(f, u):
    """Multiplier with the sign convention flipped: -i on the closed half-plane."""
    mask = half_plane_mask(f.grid, u)
    return inverse(forward(f).scaled(np.where(mask, -1j, 1j)))


def test_corrupted_sign_trips_eigenrelation():
    rows = run_all(seed=0, hilbert=corrupted_hilbert)
    eig = [r for r in rows if r.suite == "eigenrelation"]
    assert eig and not any(r.passed for r in eig)
    assert all(r.passed for r in rows if r.suite in ("parseval", "roundtrip", "one_third", "permutation"))
