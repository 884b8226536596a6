"""Shared estimator contract: quantile specification, validation, dispatch.

Every estimator consumes one finite value per ``observe`` call and exposes a
running quantile through ``estimate``.  States are plain data with
single-writer semantics: one state is mutated by at most one thread at a
time, but may be handed to another thread between calls.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCapacity, InvalidQuantile, NonFiniteValue, NotWarmedUp

#: Estimator kinds understood by :func:`create_estimator` and the bench CLI.
KINDS = ("tas", "p2", "reservoir", "eqhist")

#: Smallest supported buffer capacity.  The adaptive-sample insertion rules
#: compare the quantile index against floor(m/2) and both buffer ends; below
#: m = 3 those branches degenerate.
MIN_CAPACITY = 3


@dataclass(frozen=True)
class QuantileSpec:
    """Target quantile ``q`` and buffer capacity ``m`` for one estimator."""

    q: float
    m: int

    def __post_init__(self):
        if not (isinstance(self.q, (int, float)) and math.isfinite(self.q)):
            raise InvalidQuantile(f"q must be a finite number, got {self.q!r}")
        if not 0.0 < self.q < 1.0:
            raise InvalidQuantile(f"q must lie in (0, 1), got {self.q}")
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise InvalidCapacity(f"m must be an integer, got {self.m!r}")
        if self.m < MIN_CAPACITY:
            raise InvalidCapacity(f"m must be >= {MIN_CAPACITY}, got {self.m}")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "m", int(self.m))


def make_spec(q: float, m: int) -> QuantileSpec:
    """Validate and build a :class:`QuantileSpec`."""
    return QuantileSpec(q, m)


def require_finite(x) -> float:
    """Coerce ``x`` to float, rejecting NaN and infinities."""
    v = float(x)
    if not math.isfinite(v):
        raise NonFiniteValue(f"stream value must be finite, got {x!r}")
    return v


def as_finite_array(xs) -> np.ndarray:
    """Coerce a batch of observations to a float64 array, rejecting non-finite entries."""
    arr = np.ascontiguousarray(xs, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValue(f"non-finite value at position {bad[0]}: {arr[bad[0]]!r}")
    return arr


class QuantileEstimator(abc.ABC):
    """Common observe/estimate contract for all streaming quantile estimators."""

    kind: str

    @property
    @abc.abstractmethod
    def n(self) -> int:
        """Number of observations consumed so far."""

    @abc.abstractmethod
    def observe(self, x: float) -> None:
        """Consume one finite stream value."""

    @abc.abstractmethod
    def estimate(self) -> float:
        """Current running quantile estimate.  Pure read; raises NotWarmedUp."""

    def observe_many(self, xs) -> None:
        """Consume a batch of values in order."""
        for x in as_finite_array(xs):
            self.observe(x)

    def ready(self) -> bool:
        """True once ``estimate`` can return a value."""
        try:
            self.estimate()
        except NotWarmedUp:
            return False
        return True


def create_estimator(kind: str, spec: QuantileSpec, seed: int = 0) -> QuantileEstimator:
    """Instantiate an estimator by kind.

    ``seed`` is only consumed by the reservoir sampler; ``spec.m`` is ignored
    by the p2 estimator, which always keeps a fixed five-marker summary.
    """
    from .baselines import EquispacedHistogram, P2Quantile, ReservoirSample
    from .tas import TargetedAdaptiveSample

    if kind == "tas":
        return TargetedAdaptiveSample(spec)
    if kind == "p2":
        return P2Quantile(spec.q)
    if kind == "reservoir":
        return ReservoirSample(spec, seed=seed)
    if kind == "eqhist":
        return EquispacedHistogram(spec)
    raise ValueError(f"unknown estimator kind {kind!r}; expected one of {KINDS}")
