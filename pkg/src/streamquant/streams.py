"""Deterministic synthetic stream generators.

Streams are described declaratively (:class:`StreamSpec`) and drawn from a
pinned, portable pseudo-random algorithm: splitmix64 run in counter mode
(value ``i`` of a stream depends only on ``seed`` and ``i``), with
distribution shapes produced by deterministic inverse-CDF transforms (no
rejection loops).  Identical specs therefore yield identical streams
regardless of chunking, and any suffix can be regenerated without replaying
the prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numba import njit

from ._bits import GAMMA as _GAMMA
from ._bits import MASK64 as _MASK64
from ._bits import mix64 as _mix64
from .errors import InvalidSpec

_U64 = np.uint64

DIST_UNIFORM = 0
DIST_NORMAL = 1
DIST_LOGNORMAL = 2
DIST_PARETO = 3
DIST_CONSTANT = 4

_DIST_CODES = {
    "uniform": DIST_UNIFORM,
    "normal": DIST_NORMAL,
    "lognormal": DIST_LOGNORMAL,
    "pareto": DIST_PARETO,
    "constant": DIST_CONSTANT,
}


@njit(cache=True, inline="always")
def _u01_at(seed, index):
    """Uniform deviate in the open interval (0, 1) for stream position ``index``."""
    z = _mix64((seed + (_U64(index) + _U64(1)) * _GAMMA) & _MASK64)
    return (np.float64(z >> _U64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _norm_inv(p):
    """Inverse standard-normal CDF (Acklam's rational approximation, ~1e-9)."""
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                   - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
                 + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
               ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
                  + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    if p > 0.97575:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                    - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
                  + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
               ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
                  + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
               - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
             - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q / \
           (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
               - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
             - 1.328068155288572e+01) * r + 1.0)


@njit(cache=True)
def _fill_segment(out, seed, start_index, dist, p0, p1, scale):
    """Fill ``out`` with draws for global stream positions start_index + i."""
    n = out.shape[0]
    for i in range(n):
        if dist == DIST_CONSTANT:
            v = p0
        else:
            u = _u01_at(seed, start_index + i)
            if dist == DIST_UNIFORM:
                v = p0 + (p1 - p0) * u
            elif dist == DIST_NORMAL:
                v = p0 + p1 * _norm_inv(u)
            elif dist == DIST_LOGNORMAL:
                v = math.exp(p0 + p1 * _norm_inv(u))
            else:  # pareto
                v = p1 * u ** (-1.0 / p0)
        out[i] = v * scale
    return out


@dataclass(frozen=True)
class SegmentSpec:
    """One i.i.d. stretch of a synthetic stream.

    ``dist`` is one of uniform(lo, hi), normal(mean, sd), lognormal(mu, sigma),
    pareto(alpha, xmin), constant(c); ``scale`` multiplies every drawn value.
    """

    length: int
    dist: str
    params: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        if self.length < 1:
            raise InvalidSpec(f"segment length must be >= 1, got {self.length}")
        if self.dist not in _DIST_CODES:
            raise InvalidSpec(f"unknown distribution {self.dist!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidSpec(f"scale must be positive and finite, got {self.scale}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if any(not math.isfinite(v) for v in p):
            raise InvalidSpec(f"non-finite distribution parameter in {p}")
        expected = 1 if self.dist == "constant" else 2
        if len(p) != expected:
            raise InvalidSpec(f"{self.dist} takes {expected} parameter(s), got {len(p)}")
        if self.dist == "uniform" and not p[0] < p[1]:
            raise InvalidSpec(f"uniform needs lo < hi, got {p}")
        if self.dist == "normal" and p[1] <= 0:
            raise InvalidSpec(f"normal needs sd > 0, got {p}")
        if self.dist == "lognormal" and p[1] <= 0:
            raise InvalidSpec(f"lognormal needs sigma > 0, got {p}")
        if self.dist == "pareto" and (p[0] <= 0 or p[1] <= 0):
            raise InvalidSpec(f"pareto needs alpha > 0 and xmin > 0, got {p}")

    @staticmethod
    def uniform(length, lo, hi, scale=1.0):
        return SegmentSpec(length, "uniform", (lo, hi), scale)

    @staticmethod
    def normal(length, mean, sd, scale=1.0):
        return SegmentSpec(length, "normal", (mean, sd), scale)

    @staticmethod
    def lognormal(length, mu, sigma, scale=1.0):
        return SegmentSpec(length, "lognormal", (mu, sigma), scale)

    @staticmethod
    def pareto(length, alpha, xmin, scale=1.0):
        return SegmentSpec(length, "pareto", (alpha, xmin), scale)

    @staticmethod
    def constant(length, c, scale=1.0):
        return SegmentSpec(length, "constant", (c,), scale)

    def analytic_mean(self) -> float:
        """Mean of the scaled distribution; NaN where it does not exist."""
        p = self.params
        if self.dist == "uniform":
            mean = 0.5 * (p[0] + p[1])
        elif self.dist == "normal":
            mean = p[0]
        elif self.dist == "lognormal":
            mean = math.exp(p[0] + 0.5 * p[1] * p[1])
        elif self.dist == "pareto":
            mean = p[0] * p[1] / (p[0] - 1.0) if p[0] > 1.0 else math.nan
        else:
            mean = p[0]
        return mean * self.scale


@dataclass(frozen=True)
class StreamSpec:
    """Ordered segments plus a 64-bit seed; identical specs yield identical streams."""

    segments: tuple
    seed: int = 0

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise InvalidSpec("stream needs at least one segment")
        if not all(isinstance(s, SegmentSpec) for s in segs):
            raise InvalidSpec("segments must be SegmentSpec instances")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidSpec(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def length(self) -> int:
        return sum(s.length for s in self.segments)


def iter_chunks(spec: StreamSpec, chunk_size: int = 1 << 16) -> Iterator[np.ndarray]:
    """Yield the stream as float64 arrays of at most ``chunk_size`` values."""
    if chunk_size < 1:
        raise InvalidSpec("chunk_size must be >= 1")
    seed = _U64(spec.seed)
    start = 0
    for seg in spec.segments:
        code = _DIST_CODES[seg.dist]
        p0 = seg.params[0]
        p1 = seg.params[1] if len(seg.params) > 1 else 0.0
        done = 0
        while done < seg.length:
            take = min(chunk_size, seg.length - done)
            out = np.empty(take, np.float64)
            _fill_segment(out, seed, start + done, code, p0, p1, seg.scale)
            yield out
            done += take
        start += seg.length


def gen_stream(spec: StreamSpec) -> Iterator[float]:
    """Emit the stream one value at a time without materializing it."""
    for chunk in iter_chunks(spec):
        yield from chunk.tolist()


def materialize(spec: StreamSpec) -> np.ndarray:
    """Generate the whole stream as one float64 array."""
    out = np.empty(spec.length, np.float64)
    pos = 0
    for chunk in iter_chunks(spec, chunk_size=1 << 20):
        out[pos:pos + chunk.shape[0]] = chunk
        pos += chunk.shape[0]
    return out


# --- presets -----------------------------------------------------------------

#: Quiet-phase lognormal shape used by the burst preset.
BURST_MU = 0.0
BURST_SIGMA = 1.0

#: Published summary statistics of the large heavy-tailed reference stream the
#: ``heavy`` preset is calibrated against (sample mean and standard deviation).
CALIBRATED_MEAN = 2.25
CALIBRATED_SD = 15.92


def gen_burst_preset(n_quiet: int, n_burst: int, jump: float = 10.0,
                     seed: int = 0) -> StreamSpec:
    """Two-segment regime switch: quiet lognormal, then the same scaled by ``jump``.

    ``jump`` >= 1; ``jump`` = 1 degenerates to a stationary stream.  Because the
    post-switch running quantile mixes quiet and burst data, its rise stays
    below ``jump``; pass a larger ``jump`` when a specific rise factor is needed.
    """
    if not (math.isfinite(jump) and jump >= 1.0):
        raise InvalidSpec(f"jump must be >= 1, got {jump}")
    return StreamSpec(
        (
            SegmentSpec.lognormal(n_quiet, BURST_MU, BURST_SIGMA),
            SegmentSpec.lognormal(n_burst, BURST_MU, BURST_SIGMA, scale=jump),
        ),
        seed=seed,
    )


def gen_stationary_preset(n: int, seed: int = 0) -> StreamSpec:
    """Single stationary lognormal segment."""
    return StreamSpec((SegmentSpec.lognormal(n, BURST_MU, BURST_SIGMA),), seed=seed)


def heavy_lognormal_params() -> tuple[float, float]:
    """Lognormal (mu, sigma) whose analytic mean/sd match the calibration targets."""
    sigma2 = math.log1p((CALIBRATED_SD / CALIBRATED_MEAN) ** 2)
    mu = math.log(CALIBRATED_MEAN) - 0.5 * sigma2
    return mu, math.sqrt(sigma2)


def gen_heavy_preset(n: int, seed: int = 0) -> StreamSpec:
    """Heavy-tailed lognormal calibrated to the reference stream's mean and sd."""
    mu, sigma = heavy_lognormal_params()
    return StreamSpec((SegmentSpec.lognormal(n, mu, sigma),), seed=seed)
