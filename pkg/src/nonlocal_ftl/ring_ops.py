"""Periodic sequence arithmetic.

A periodic sequence is a 1-D float array ``a`` of length ``M`` with the
convention ``a[i] == a[i mod M]`` for every integer ``i``. All operators
here return new arrays and never mutate their inputs.

numpy's ``sum`` uses pairwise summation, which keeps the telescoping and
summation-by-parts identities accurate to ~1e-12 for the sizes we use.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .velocity import WeightProfile


def as_periodic(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("periodic sequence must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("periodic sequence has non-finite entries")
    return arr


def wrap(i, M: int):
    """Nonnegative remainder, so negative logical indices are valid."""
    return np.mod(i, M)


def delta_plus(a) -> np.ndarray:
    """Forward difference ``a[i+1] - a[i]``."""
    a = as_periodic(a)
    return np.roll(a, -1) - a


def delta_minus(a) -> np.ndarray:
    """Backward difference ``a[i] - a[i-1]``."""
    a = as_periodic(a)
    return a - np.roll(a, 1)


def shifted_stack(a: np.ndarray, n_shifts: int) -> np.ndarray:
    """Rows ``j = 0..n_shifts-1`` hold ``a[i+j]`` for all i."""
    M = a.size
    idx = wrap(np.arange(n_shifts)[:, None] + np.arange(M)[None, :], M)
    return a[idx]


def bar(a, w: "WeightProfile") -> np.ndarray:
    """Forward weighted mean ``sum_j c_j a[i+j]``."""
    a = as_periodic(a)
    c = np.asarray(w.c, dtype=float)
    return c @ shifted_stack(a, c.size)


def bar_by_parts(a, w: "WeightProfile") -> np.ndarray:
    """``-sum_{j>=1} (c_j - c_{j-1}) (a[i+j] - a[i])``.

    Independent evaluation of ``delta_plus(bar(a, w))`` used to cross-check
    the summation-by-parts identity.
    """
    a = as_periodic(a)
    c = np.asarray(w.c, dtype=float)
    dc = c[1:] - c[:-1]
    shifted = shifted_stack(a, c.size)[1:]
    return -(dc @ (shifted - a[None, :]))


def tv_periodic(a) -> float:
    """Total variation over one period, wrap jump included."""
    return float(np.sum(np.abs(delta_minus(a))))


def l1_weighted(a, b, weights) -> float:
    a = as_periodic(a)
    b = as_periodic(b)
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 0:
        weights = np.full(a.size, float(weights))
    if not (a.size == b.size == weights.size):
        raise ValueError(
            f"length mismatch: a={a.size}, b={b.size}, weights={weights.size}"
        )
    if np.any(weights < 0):
        raise ValueError("cell measures must be nonnegative")
    return float(np.sum(weights * np.abs(a - b)))
