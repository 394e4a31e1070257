"""Binary tree-systems and the dyadic rearrangement that makes their partial sums large.

Nodes are numbered ``n = 1 .. 2**m - 1`` in heap order: node ``n`` sits on
level ``k = floor(log2 n)`` at position ``j = n - 2**k + 1`` and has children
``2n`` (supported where the parent is positive) and ``2n + 1`` (supported where
the parent is negative).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grid import GridField

__all__ = [
    "double_index",
    "parent",
    "child_sign",
    "dyadic_tag",
    "Permutation",
    "sorting_permutation",
    "TreeReport",
    "verify_tree_system",
    "maximal_partial_sum",
    "split_index",
]


def double_index(n: int) -> tuple[int, int]:
    """Level and in-level position ``(k, j)`` of node ``n``, with ``n = 2**k + j - 1``."""
    if n < 1:
        raise ValueError(f"node index must be >= 1, got {n}")
    k = int(n).bit_length() - 1
    return k, n - (1 << k) + 1


def parent(n: int) -> int:
    if n < 2:
        raise ValueError("the root has no parent")
    return n // 2


def child_sign(n: int) -> int:
    """``(-1)**(j+1)``: +1 for a left child (odd j, even n), -1 for a right child."""
    if n < 2:
        raise ValueError("the root has no parent")
    _, j = double_index(n)
    return 1 if j % 2 == 1 else -1


def dyadic_tag(n: int) -> Fraction:
    """``(2j - 1) / 2**(k+1)``; distinct nodes get distinct tags."""
    k, j = double_index(n)
    return Fraction(2 * j - 1, 1 << (k + 1))


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{1, ..., nu}``; ``order[i-1]`` is sigma(i)."""

    order: tuple[int, ...]
    inverse_order: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        nu = len(self.order)
        if sorted(self.order) != list(range(1, nu + 1)):
            raise ValueError("not a permutation of 1..nu")
        inv = [0] * nu
        for i, n in enumerate(self.order, start=1):
            inv[n - 1] = i
        object.__setattr__(self, "inverse_order", tuple(inv))

    def __len__(self):
        return len(self.order)

    def __call__(self, i: int) -> int:
        return self.order[i - 1]

    def inv(self, n: int) -> int:
        return self.inverse_order[n - 1]


def sorting_permutation(m: int) -> Permutation:
    """Order the nodes of a depth-``m`` tree by increasing dyadic tag."""
    if m < 1:
        raise ValueError("depth must be >= 1")
    nodes = range(1, 2**m)
    return Permutation(tuple(sorted(nodes, key=dyadic_tag)))


def _stack(fields: Sequence[GridField | np.ndarray]) -> np.ndarray:
    arrs = [f.values if isinstance(f, GridField) else np.asarray(f) for f in fields]
    return np.stack(arrs)


def _default_tol(values: np.ndarray) -> float:
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    return 1e-9 * peak


@dataclass
class TreeReport:
    """Outcome of :func:`verify_tree_system`.

    ``node_ok[n]`` is the support check for node ``n`` (the root always passes);
    ``violations[n]`` counts samples of ``supp f_n`` outside the prescribed sign
    set of its parent.  ``descendant_failures`` lists ``(ancestor, node)`` pairs
    whose support meets the wrong sign set of the ancestor.
    """

    node_ok: dict[int, bool]
    violations: dict[int, int]
    descendant_failures: list[tuple[int, int]]
    supp_tol: float

    @property
    def passed(self) -> bool:
        return all(self.node_ok.values()) and not self.descendant_failures

    @property
    def failed_nodes(self) -> list[int]:
        return [n for n, ok in self.node_ok.items() if not ok]


def verify_tree_system(
    fields: Sequence[GridField | np.ndarray],
    supp_tol: float | None = None,
    check_descendants: bool = True,
) -> TreeReport:
    """Check ``supp f_n`` is inside ``{child_sign(n) * f_parent(n) > 0}`` for every node.

    Discrete support is ``{|f| > supp_tol}``; the sign set is taken literally
    (``> 0``, no tolerance).  The default tolerance is ``1e-9 * max |f|``
    over the whole system.  With ``check_descendants`` every
    node is also tested against all of its ancestors, which is what the
    two-sided inclusions for deeper descendants amount to.
    """
    F = _stack(fields)
    nu = F.shape[0]
    if nu < 1 or (nu + 1) & nu:
        raise ValueError(f"a tree-system has 2**m - 1 members, got {nu}")
    if np.iscomplexobj(F):
        if np.any(F.imag != 0):
            raise ValueError("tree-system fields must be real")
        F = F.real
    tol = _default_tol(F) if supp_tol is None else float(supp_tol)
    if tol < 0:
        raise ValueError("supp_tol must be nonnegative")

    supp = np.abs(F) > tol
    node_ok = {1: True}
    violations = {1: 0}
    for n in range(2, nu + 1):
        allowed = child_sign(n) * F[parent(n) - 1] > 0
        bad = int(np.count_nonzero(supp[n - 1] & ~allowed))
        node_ok[n] = bad == 0
        violations[n] = bad

    desc = []
    if check_descendants:
        for n in range(2, nu + 1):
            child, anc = n, n // 2
            while anc >= 1:
                if not np.all(~supp[n - 1] | (child_sign(child) * F[anc - 1] > 0)):
                    desc.append((anc, n))
                child, anc = anc, anc // 2
    return TreeReport(node_ok, violations, desc, tol)


def maximal_partial_sum(
    fields: Sequence[GridField | np.ndarray], sigma: Permutation
) -> GridField | np.ndarray:
    """Pointwise ``max_l |sum_{i <= l} f_sigma(i)|`` in one pass over the nodes."""
    F = _stack(fields)
    if F.shape[0] != len(sigma):
        raise ValueError(f"{F.shape[0]} fields for a permutation of length {len(sigma)}")
    running = np.zeros(F.shape[1:], dtype=F.dtype)
    # Integer systems stay integer so the 1/3 bound can be checked exactly.
    best = np.zeros(F.shape[1:], dtype=F.dtype if F.dtype.kind in "iu" else np.float64)
    for n in sigma.order:
        running = running + F[n - 1]
        np.maximum(best, np.abs(running), out=best)
    if isinstance(fields[0], GridField):
        return GridField(fields[0].grid, best)
    return best


def split_index(fields: Sequence[GridField | np.ndarray], sigma: Permutation, index) -> int:
    """Largest ``l`` with ``f_sigma(l) <= 0`` at the sample ``index``; 0 if there is none."""
    vals = [np.asarray(f.values if isinstance(f, GridField) else f)[index] for f in fields]
    ordered = [vals[n - 1] for n in sigma.order]
    l = 0
    for i, v in enumerate(ordered, start=1):
        if v <= 0:
            l = i
    return l


def haar_system(m: int, size: int | None = None) -> np.ndarray:
    """Integer Haar tree on ``size`` 1-D cells (default ``2**m``).

    Node ``n`` on level ``k`` is +1 on the left half and -1 on the right half
    of its dyadic interval, so ``2n`` lives where it is positive and
    ``2n + 1`` where it is negative.
    """
    size = 2**m if size is None else size
    if size % 2**m:
        raise ValueError("size must be a multiple of 2**m")
    out = np.zeros((2**m - 1, size), dtype=np.int64)
    for n in range(1, 2**m):
        k, j = double_index(n)
        w = size >> k
        lo = (j - 1) * w
        out[n - 1, lo : lo + w // 2] = 1
        out[n - 1, lo + w // 2 : lo + w] = -1
    return out


def random_tree_system(
    rng: np.random.Generator, m: int, shape=(16, 16), max_value: int = 5, density: float = 0.8
) -> np.ndarray:
    """Piecewise-constant integer tree-system on a cell array of the given shape.

    Each child keeps a random subset (probability ``density``) of its parent's
    positive or negative set and takes random nonzero values there.
    """
    nu = 2**m - 1
    out = np.zeros((nu,) + tuple(shape), dtype=np.int64)

    def values(mask):
        v = rng.integers(1, max_value + 1, size=mask.shape) * rng.choice((-1, 1), size=mask.shape)
        return np.where(mask, v, 0)

    out[0] = values(np.ones(shape, dtype=bool))
    for n in range(2, nu + 1):
        allowed = child_sign(n) * out[parent(n) - 1] > 0
        out[n - 1] = values(allowed & (rng.random(shape) < density))
    return out
