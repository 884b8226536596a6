"""Targeted adaptive sample: a bounded buffer that tracks one quantile.

The estimator keeps an ordered buffer of up to ``m`` unique stream values
``b_1 < ... < b_m`` and, for each, a real-valued count ``a_i`` estimating how
many historical data points lie strictly below ``b_i``.  The first ``m``
unique values are stored outright with exact counts; afterwards each arrival
either updates counts (duplicates and rejected extremes) or swaps one buffer
element: a datum below the current quantile position can displace the buffer
maximum, one above it can displace the minimum.  The two swap rules steer the
quantile's buffer index toward the middle and shrink the value range covered
by the buffer whenever the estimate is stable, concentrating resolution where
the quantile actually lives.  Counts of freshly inserted values are linearly
interpolated from their neighbours, so they are estimates once the buffer has
cycled, but remain exact while every observed unique value is still stored.

The quantile's buffer index is the greatest ``i`` whose below-count stays
under the target rank: ``k = max{ i : a_i < ceil(q * n) }`` (falling back to
the closest end).  With exact counts this reproduces the exact-oracle rank
convention, duplicates included.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import QuantileEstimator, QuantileSpec, as_finite_array, require_finite
from .errors import EmptyBuffer, NotWarmedUp
from .oracle import _rank_index


@njit(cache=True, inline="always")
def _tas_locate0(values, counts, size, n, q):
    """0-based buffer index of the current quantile (pre-validated size >= 1)."""
    r = np.float64(_rank_index(n, q))
    lo = 0
    hi = size  # first index with counts[idx] >= r, searched in [lo, hi)
    while lo < hi:
        mid = (lo + hi) >> 1
        if counts[mid] < r:
            lo = mid + 1
        else:
            hi = mid
    if lo == 0:
        return 0
    return lo - 1


@njit(cache=True, inline="always")
def _interp_count(values, counts, pos, x):
    """Count for ``x`` inserted before index ``pos`` by linear interpolation."""
    c0 = counts[pos - 1]
    c1 = counts[pos]
    cnt = c0 + (c1 - c0) * ((x - values[pos - 1]) / (values[pos] - values[pos - 1]))
    if cnt > c1:  # guard the 1-ulp overshoot so counts stay nondecreasing
        cnt = c1
    return cnt


@njit(cache=True)
def _tas_observe(values, counts, size, n, q, m, x):
    """Consume one datum; ``n`` is the count before ``x``.  Returns the new size."""
    pos = np.searchsorted(values[:size], x)

    # duplicate: membership unchanged, higher values gain one datum below them
    if pos < size and values[pos] == x:
        for i in range(pos + 1, size):
            counts[i] += 1.0
        return size

    # warm-up: every unique value seen so far is stored, counts stay exact
    if size < m:
        if pos == size:
            cnt = np.float64(n)
        else:
            cnt = counts[pos]
        for i in range(size, pos, -1):
            values[i] = values[i - 1]
            counts[i] = counts[i - 1]
        values[pos] = x
        counts[pos] = cnt
        for i in range(pos + 1, size + 1):
            counts[i] += 1.0
        return size + 1

    k0 = _tas_locate0(values, counts, size, n, q)
    bk = values[k0]
    half = m // 2

    if x < bk and (k0 + 1 < half or x > values[0]):
        # displace the maximum: recenters k, or tightens the spread from above
        if pos == 0:
            cnt = counts[0] - 1.0
            if cnt < 0.0:
                cnt = 0.0
        else:
            cnt = _interp_count(values, counts, pos, x)
        for i in range(size - 1, pos, -1):
            values[i] = values[i - 1]
            counts[i] = counts[i - 1]
        values[pos] = x
        counts[pos] = cnt
        for i in range(pos + 1, size):
            counts[i] += 1.0
        return size

    if x > bk and (k0 + 1 > half or x < values[size - 1]):
        # displace the minimum (mirror case)
        if pos == size:
            cnt = counts[size - 1] + 1.0
        else:
            cnt = _interp_count(values, counts, pos, x)
        for i in range(pos - 1):
            values[i] = values[i + 1]
            counts[i] = counts[i + 1]
        values[pos - 1] = x
        counts[pos - 1] = cnt
        for i in range(pos, size):
            counts[i] += 1.0
        return size

    # rejected extreme: only the below-counts of greater stored values move
    for i in range(pos, size):
        counts[i] += 1.0
    return size


@njit(cache=True)
def _tas_observe_many(values, counts, size, n, q, m, xs):
    for t in range(xs.shape[0]):
        size = _tas_observe(values, counts, size, n, q, m, xs[t])
        n += 1
    return size, n


@njit(cache=True)
def _tas_fuzz_check(values, counts, size, n, q, m, xs):
    """Observe ``xs`` verifying structural invariants after every datum.

    Returns (size, n, first_bad_step); first_bad_step is -1 when clean.
    """
    bad = np.int64(-1)
    for t in range(xs.shape[0]):
        prev_size = size
        size = _tas_observe(values, counts, size, n, q, m, xs[t])
        n += 1
        if size > m or size < prev_size or (prev_size == m and size != m):
            bad = t
            break
        ok = True
        for i in range(size):
            if counts[i] < 0.0 or counts[i] > n:
                ok = False
            if i > 0 and (values[i] <= values[i - 1] or counts[i] < counts[i - 1]):
                ok = False
        if not ok:
            bad = t
            break
    return size, n, bad


class TargetedAdaptiveSample(QuantileEstimator):
    """Adaptive ordered sample centred on the target quantile."""

    kind = "tas"

    def __init__(self, spec: QuantileSpec):
        self.spec = spec
        self._values = np.empty(spec.m, np.float64)
        self._counts = np.empty(spec.m, np.float64)
        self._size = 0
        self._n = 0

    @property
    def n(self) -> int:
        return self._n

    @property
    def size(self) -> int:
        """Number of unique values currently buffered (m' <= m)."""
        return self._size

    @property
    def values(self) -> np.ndarray:
        """Buffered values, strictly increasing (copy)."""
        return self._values[: self._size].copy()

    @property
    def counts(self) -> np.ndarray:
        """Below-count estimates aligned with :attr:`values` (copy)."""
        return self._counts[: self._size].copy()

    def observe(self, x: float) -> None:
        v = require_finite(x)
        self._size = int(_tas_observe(self._values, self._counts, self._size,
                                      self._n, self.spec.q, self.spec.m, v))
        self._n += 1

    def observe_many(self, xs) -> None:
        arr = as_finite_array(xs)
        size, n = _tas_observe_many(self._values, self._counts, self._size,
                                    self._n, self.spec.q, self.spec.m, arr)
        self._size, self._n = int(size), int(n)

    def locate_index(self) -> int:
        """1-based buffer index of the current quantile estimate."""
        if self._size == 0:
            raise EmptyBuffer("no values buffered yet")
        return int(_tas_locate0(self._values, self._counts, self._size,
                                self._n, self.spec.q)) + 1

    def estimate(self) -> float:
        if self._size == 0:
            raise NotWarmedUp("no values observed yet")
        return float(self._values[self.locate_index() - 1])

    def spread(self) -> float:
        """Value range covered by the buffer, b_max - b_min."""
        if self._size == 0:
            raise EmptyBuffer("no values buffered yet")
        return float(self._values[self._size - 1] - self._values[0])

    def center_offset(self) -> int:
        """Displacement of the quantile's buffer index from the buffer middle."""
        if self._size == 0:
            raise EmptyBuffer("no values buffered yet")
        return self.locate_index() - (self._size + 1) // 2
