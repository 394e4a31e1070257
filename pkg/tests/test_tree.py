from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sector_hilbert.tree import (
    Permutation,
    child_sign,
    double_index,
    dyadic_tag,
    haar_system,
    maximal_partial_sum,
    parent,
    random_tree_system,
    sorting_permutation,
    split_index,
    verify_tree_system,
)


@pytest.mark.parametrize("n,k,j", [(1, 0, 1), (2, 1, 1), (3, 1, 2), (4, 2, 1), (7, 2, 4), (8, 3, 1)])
def test_double_index(n, k, j):
    assert double_index(n) == (k, j)
    assert n == 2**k + j - 1


def test_parent_and_sign():
    assert [parent(n) for n in range(2, 8)] == [1, 1, 2, 2, 3, 3]
    assert [child_sign(n) for n in range(2, 8)] == [1, -1, 1, -1, 1, -1]
    with pytest.raises(ValueError):
        parent(1)
    with pytest.raises(ValueError):
        double_index(0)


def test_dyadic_tags():
    assert [dyadic_tag(n) for n in range(1, 8)] == [
        Fraction(1, 2), Fraction(1, 4), Fraction(3, 4),
        Fraction(1, 8), Fraction(3, 8), Fraction(5, 8), Fraction(7, 8),
    ]
    tags = [dyadic_tag(n) for n in range(1, 2**8)]
    assert len(set(tags)) == len(tags)


@pytest.mark.parametrize("m,expected", [(1, (1,)), (2, (2, 1, 3)), (3, (4, 2, 5, 1, 6, 3, 7))])
def test_sorting_permutation_fixtures(m, expected):
    sigma = sorting_permutation(m)
    assert sigma.order == expected
    assert all(sigma.inv(sigma(i)) == i for i in range(1, len(sigma) + 1))


def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation((1, 1, 3))
    with pytest.raises(ValueError):
        sorting_permutation(0)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_haar_system_is_a_tree_system(m):
    F = haar_system(m)
    assert verify_tree_system(F).passed


def test_wrong_child_sign_fails():
    F = haar_system(2).copy()
    F[[1, 2]] = F[[2, 1]]  # swap the children of the root
    report = verify_tree_system(F)
    assert not report.passed
    assert report.failed_nodes == [2, 3]
    assert report.violations[2] > 0


def test_leak_outside_parent_support_fails():
    F = haar_system(3, size=16).copy()
    # Node 4 lives where node 2 is positive (cells 0-3); cell 12 is outside supp f_2.
    F[3, 12] = 1
    report = verify_tree_system(F)
    assert not report.passed
    assert report.failed_nodes == [4]
    assert (1, 4) in report.descendant_failures


def test_verify_rejects_bad_sizes_and_complex():
    with pytest.raises(ValueError):
        verify_tree_system(np.zeros((2, 4)))
    with pytest.raises(ValueError):
        verify_tree_system(np.ones((1, 4)) * 1j)


def test_split_index():
    sigma = sorting_permutation(2)  # (2, 1, 3)
    F = np.array([[1], [-1], [0]])  # f_1 = 1, f_2 = -1, f_3 = 0
    assert split_index(F, sigma, (0,)) == 3  # f_sigma(3) = f_3 = 0 <= 0
    F2 = np.array([[1], [-1], [2]])
    assert split_index(F2, sigma, (0,)) == 1
    assert split_index(np.array([[1], [1], [1]]), sigma, (0,)) == 0


def test_maximal_partial_sum_on_haar():
    F = haar_system(2)
    M = maximal_partial_sum(F, sorting_permutation(2))
    assert M.dtype.kind == "i"
    assert np.all(3 * M >= np.abs(F).sum(axis=0))


def test_maximal_partial_sum_length_mismatch():
    with pytest.raises(ValueError):
        maximal_partial_sum(haar_system(2), sorting_permutation(3))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 6), density=st.floats(0.3, 1.0))
def test_one_third_inequality_exact(seed, m, density):
    rng = np.random.default_rng(seed)
    F = random_tree_system(rng, m, shape=(8, 8), density=density)
    assert verify_tree_system(F).passed
    M = maximal_partial_sum(F, sorting_permutation(m))
    assert np.all(3 * M >= np.abs(F).sum(axis=0))
