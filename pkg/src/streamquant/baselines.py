"""Comparator estimators: five-marker p2, reservoir sample, equispaced histogram.

All three are classic bounded-memory running-quantile methods.  The p2
estimator keeps five markers whose values move by piecewise-parabolic
interpolation; the reservoir keeps a uniform random sample of the stream; the
equispaced histogram keeps ``m`` equal-width bins over the observed range,
rescaling the grid whenever a datum falls outside it.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._bits import U64, next64
from .core import QuantileEstimator, QuantileSpec, as_finite_array, require_finite
from .errors import NotWarmedUp
from .oracle import _rank_index, rank_index


# --- p2: five markers, piecewise-parabolic updates ----------------------------

@njit(cache=True)
def _p2_observe(h, npos, dpos, inc, warm, count, x):
    """Consume one datum; returns the new observation count."""
    if count < 5:
        warm[count] = x
        count += 1
        if count == 5:
            for i in range(5):
                h[i] = warm[i]
            for i in range(1, 5):  # insertion sort of the first five
                key = h[i]
                j = i - 1
                while j >= 0 and h[j] > key:
                    h[j + 1] = h[j]
                    j -= 1
                h[j + 1] = key
            for i in range(5):
                npos[i] = i + 1
        return count

    # locate the marker cell containing x, clamping the extreme markers
    if x < h[0]:
        h[0] = x
        k = 0
    elif x >= h[4]:
        if x > h[4]:
            h[4] = x
        k = 3
    else:
        k = 0
        for i in range(1, 4):
            if x >= h[i]:
                k = i
    count += 1
    for j in range(k + 1, 5):
        npos[j] += 1
    for j in range(5):
        dpos[j] += inc[j]

    for i in range(1, 4):
        d = dpos[i] - npos[i]
        if (d >= 1.0 and npos[i + 1] - npos[i] > 1) or \
           (d <= -1.0 and npos[i - 1] - npos[i] < -1):
            s = 1 if d >= 1.0 else -1
            nm = np.float64(npos[i - 1])
            ni = np.float64(npos[i])
            npl = np.float64(npos[i + 1])
            hp = h[i] + (s / (npl - nm)) * (
                (ni - nm + s) * (h[i + 1] - h[i]) / (npl - ni)
                + (npl - ni - s) * (h[i] - h[i - 1]) / (ni - nm))
            if h[i - 1] < hp < h[i + 1]:
                h[i] = hp
            else:  # parabolic step would break marker ordering
                h[i] = h[i] + s * (h[i + s] - h[i]) / (npos[i + s] - npos[i])
            npos[i] += s
    return count


class P2Quantile(QuantileEstimator):
    """Five-marker running quantile with parabolic marker movement.

    Ignores buffer capacity: the summary is always exactly five markers.
    Needs five observations before it can estimate.
    """

    kind = "p2"

    def __init__(self, q: float):
        if not 0.0 < q < 1.0:
            from .errors import InvalidQuantile
            raise InvalidQuantile(f"q must lie in (0, 1), got {q}")
        self.q = float(q)
        self._h = np.zeros(5, np.float64)
        self._npos = np.zeros(5, np.int64)
        self._dpos = np.array([1.0, 1.0 + 2.0 * q, 1.0 + 4.0 * q,
                               3.0 + 2.0 * q, 5.0], np.float64)
        self._inc = np.array([0.0, q / 2.0, q, (1.0 + q) / 2.0, 1.0], np.float64)
        self._warm = np.zeros(5, np.float64)
        self._n = 0

    @property
    def n(self) -> int:
        return self._n

    @property
    def markers(self) -> np.ndarray:
        return self._h.copy()

    @property
    def positions(self) -> np.ndarray:
        return self._npos.copy()

    @property
    def desired_positions(self) -> np.ndarray:
        return self._dpos.copy()

    @property
    def increments(self) -> np.ndarray:
        return self._inc.copy()

    def observe(self, x: float) -> None:
        v = require_finite(x)
        self._n = int(_p2_observe(self._h, self._npos, self._dpos, self._inc,
                                  self._warm, self._n, v))

    def observe_many(self, xs) -> None:
        for v in as_finite_array(xs):
            self._n = int(_p2_observe(self._h, self._npos, self._dpos, self._inc,
                                      self._warm, self._n, v))

    def estimate(self) -> float:
        if self._n < 5:
            raise NotWarmedUp(f"p2 needs 5 observations, has {self._n}")
        return float(self._h[2])


# --- reservoir: uniform random sample of the stream ---------------------------

@njit(cache=True)
def _res_observe(buf, srt, n, filled, rng, m, x):
    """Algorithm-R step; returns (new n, new filled)."""
    n += 1
    if filled < m:
        buf[filled] = x
        pos = np.searchsorted(srt[:filled], x)
        for i in range(filled, pos, -1):
            srt[i] = srt[i - 1]
        srt[pos] = x
        return n, filled + 1
    j = next64(rng) % U64(n)
    if j < U64(m):
        old = buf[j]
        buf[j] = x
        rpos = np.searchsorted(srt[:m], old)  # leftmost copy of old
        ipos = np.searchsorted(srt[:m], x)
        if ipos <= rpos:
            for i in range(rpos, ipos, -1):
                srt[i] = srt[i - 1]
            srt[ipos] = x
        else:
            for i in range(rpos, ipos - 1):
                srt[i] = srt[i + 1]
            srt[ipos - 1] = x
    return n, filled


class ReservoirSample(QuantileEstimator):
    """Uniform reservoir of up to ``m`` stream values; deterministic per seed."""

    kind = "reservoir"

    def __init__(self, spec: QuantileSpec, seed: int = 0):
        self.spec = spec
        self._buf = np.empty(spec.m, np.float64)
        self._srt = np.empty(spec.m, np.float64)
        self._rng = np.array([seed & 0xFFFFFFFFFFFFFFFF], np.uint64)
        self._n = 0
        self._filled = 0

    @property
    def n(self) -> int:
        return self._n

    @property
    def buffer(self) -> np.ndarray:
        """Current sample in slot order (copy)."""
        return self._buf[: self._filled].copy()

    def observe(self, x: float) -> None:
        v = require_finite(x)
        n, filled = _res_observe(self._buf, self._srt, self._n, self._filled,
                                 self._rng, self.spec.m, v)
        self._n, self._filled = int(n), int(filled)

    def observe_many(self, xs) -> None:
        arr = as_finite_array(xs)
        n, filled = self._n, self._filled
        for v in arr:
            n, filled = _res_observe(self._buf, self._srt, n, filled,
                                     self._rng, self.spec.m, v)
        self._n, self._filled = int(n), int(filled)

    def estimate(self) -> float:
        if self._filled == 0:
            raise NotWarmedUp("reservoir is empty")
        return float(self._srt[rank_index(self._filled, self.spec.q) - 1])


# --- equispaced histogram: m equal bins over the observed range ---------------

@njit(cache=True, inline="always")
def _eq_bin(v, lo, w, m):
    i = np.int64((v - lo) / w)
    if i < 0:
        i = 0
    if i >= m:
        i = m - 1
    return i


@njit(cache=True)
def _eq_rebin(bins, tmp, m, lo, hi, nlo, nhi):
    """Move bin masses from grid [lo, hi] onto [nlo, nhi], uniform within bins."""
    w_old = (hi - lo) / m
    w_new = (nhi - nlo) / m
    for j in range(m):
        tmp[j] = 0.0
    for i in range(m):
        mass = bins[i]
        if mass == 0.0:
            continue
        a = lo + i * w_old
        b = lo + (i + 1) * w_old
        ja = _eq_bin(a, nlo, w_new, m)
        jb = _eq_bin(b, nlo, w_new, m)
        if ja == jb:
            tmp[ja] += mass
        else:
            for j in range(ja, jb + 1):
                left = nlo + j * w_new
                right = nlo + (j + 1) * w_new
                if left < a:
                    left = a
                if right > b:
                    right = b
                if right > left:
                    tmp[j] += mass * ((right - left) / (b - a))
    for j in range(m):
        bins[j] = tmp[j]


@njit(cache=True)
def _eq_observe(bins, tmp, meta, m, x):
    """meta = [lo, hi, n] as float64."""
    n = meta[2]
    if n == 0.0:
        meta[0] = x
        meta[1] = x
        meta[2] = 1.0
        return
    lo = meta[0]
    hi = meta[1]
    if lo == hi:
        if x == lo:
            meta[2] = n + 1.0
            return
        nlo = min(lo, x)
        nhi = max(hi, x)
        w = (nhi - nlo) / m
        for i in range(m):
            bins[i] = 0.0
        bins[_eq_bin(lo, nlo, w, m)] += n
        bins[_eq_bin(x, nlo, w, m)] += 1.0
        meta[0] = nlo
        meta[1] = nhi
        meta[2] = n + 1.0
        return
    if x < lo or x > hi:
        nlo = min(lo, x)
        nhi = max(hi, x)
        _eq_rebin(bins, tmp, m, lo, hi, nlo, nhi)
        lo = nlo
        hi = nhi
        meta[0] = lo
        meta[1] = hi
    w = (hi - lo) / m
    bins[_eq_bin(x, lo, w, m)] += 1.0
    meta[2] = n + 1.0


@njit(cache=True)
def _eq_estimate(bins, meta, m, q):
    lo = meta[0]
    hi = meta[1]
    n = meta[2]
    if lo == hi:
        return lo
    target = q * n
    w = (hi - lo) / m
    cum = 0.0
    for i in range(m):
        mass = bins[i]
        if mass > 0.0 and cum + mass >= target:
            v = lo + i * w + w * ((target - cum) / mass)
            if v < lo:
                v = lo
            if v > hi:
                v = hi
            return v
        cum += mass
    return hi


class EquispacedHistogram(QuantileEstimator):
    """Adjustable equal-width histogram; the grid grows to cover the data range."""

    kind = "eqhist"

    def __init__(self, spec: QuantileSpec):
        self.spec = spec
        self._bins = np.zeros(spec.m, np.float64)
        self._tmp = np.zeros(spec.m, np.float64)
        self._meta = np.zeros(3, np.float64)  # lo, hi, n

    @property
    def n(self) -> int:
        return int(self._meta[2])

    @property
    def bounds(self) -> tuple[float, float]:
        return float(self._meta[0]), float(self._meta[1])

    @property
    def bins(self) -> np.ndarray:
        return self._bins.copy()

    def observe(self, x: float) -> None:
        v = require_finite(x)
        _eq_observe(self._bins, self._tmp, self._meta, self.spec.m, v)

    def observe_many(self, xs) -> None:
        arr = as_finite_array(xs)
        for v in arr:
            _eq_observe(self._bins, self._tmp, self._meta, self.spec.m, v)

    def estimate(self) -> float:
        if self._meta[2] == 0.0:
            raise NotWarmedUp("histogram is empty")
        return float(_eq_estimate(self._bins, self._meta, self.spec.m, self.spec.q))
