"""Empirical quantile function and nonparametric resampling.

Order statistics are paired with the plotting positions
``q_i = (i - 1)/(n - 1)`` and the quantile function is the linear
interpolation through ``{(q_i, x^(i))}``.  Ties among the order statistics
are kept as distinct interpolation nodes, so runs of equal values produce
flat segments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class SortedSample:
    """A sample stored in nondecreasing order, the domain of the quantile function."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise InputError("SortedSample needs a 1-D sample of size >= 2")
        if np.any(np.diff(arr) < 0.0):
            raise InputError("SortedSample values must be nondecreasing")
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_data(cls, data) -> "SortedSample":
        return cls(np.sort(np.asarray(data, dtype=float)))

    @property
    def size(self) -> int:
        return int(self.values.size)


def plotting_points(n: int) -> np.ndarray:
    """Probability plotting points (i-1)/(n-1) for i = 1..n; requires n >= 2."""
    if n < 2:
        raise InputError("plotting positions need a sample of size >= 2")
    return np.arange(n, dtype=float) / (n - 1)


def sample_quantile(p, s) -> np.ndarray | float:
    """Linearly interpolated sample quantile at probability ``p`` in [0, 1].

    ``s`` may be a SortedSample or an ascending-sorted array.  Exact order
    statistics are returned at the plotting positions.
    """
    values = s.values if isinstance(s, SortedSample) else np.asarray(s, dtype=float)
    if values.size < 2:
        raise InputError("sample_quantile needs at least 2 values")
    parr = np.asarray(p, dtype=float)
    if np.any(parr < 0.0) or np.any(parr > 1.0):
        raise InputError("p must lie in [0, 1]")
    out = np.interp(parr, plotting_points(values.size), values)
    return out if out.ndim else float(out)


def interp_rows(rows_sorted: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Sample quantiles of many same-length sorted rows at a shared prob grid.

    Equivalent to ``sample_quantile(probs, row)`` applied row-wise, but the
    interpolation bracket (shared by all rows) is located once.
    """
    n = rows_sorted.shape[1]
    q = plotting_points(n)
    hi = np.clip(np.searchsorted(q, probs, side="right"), 1, n - 1)
    lo = hi - 1
    w = (probs - q[lo]) / (q[hi] - q[lo])
    return rows_sorted[:, lo] * (1.0 - w) + rows_sorted[:, hi] * w


def resample_with_replacement(s, rng: np.random.Generator) -> np.ndarray:
    """Same-length uniform resample (with replacement) of a nonempty sample."""
    arr = np.asarray(s, dtype=float)
    if arr.size == 0:
        raise InputError("cannot resample an empty sample")
    idx = rng.integers(0, arr.size, size=arr.size)
    return arr[idx]
