"""Error metrics and per-run summaries.

Relative L1 error is the mean, over evaluable steps, of
``|estimate - truth| / |truth|`` in percent; steps whose truth is exactly
zero are skipped and counted separately.  Absolute Linf error is the largest
``|estimate - truth|`` over all steps.  Accumulation is strict left-to-right
in float64 so that a summary recomputed from a full trace is bit-identical
to one computed during the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import AllTruthZero, EmptySeries, EmptyTrace, LengthMismatch


@njit(cache=True)
def _rel_l1_acc(estimates, truths):
    """Left-to-right accumulation; returns (sum of ratios, evaluated, skipped)."""
    total = 0.0
    evaluated = 0
    skipped = 0
    for t in range(estimates.shape[0]):
        v = truths[t]
        if v == 0.0:
            skipped += 1
        else:
            total += abs(estimates[t] - v) / abs(v)
            evaluated += 1
    return total, evaluated, skipped


@njit(cache=True)
def _abs_linf_acc(estimates, truths):
    worst = 0.0
    for t in range(estimates.shape[0]):
        d = abs(estimates[t] - truths[t])
        if d > worst:
            worst = d
    return worst


@njit(cache=True)
def _mean_skipnan(xs):
    """Ordered mean of the non-NaN entries; (mean, count)."""
    total = 0.0
    cnt = 0
    for t in range(xs.shape[0]):
        v = xs[t]
        if not math.isnan(v):
            total += v
            cnt += 1
    if cnt == 0:
        return math.nan, 0
    return total / cnt, cnt


@njit(cache=True)
def _frac_within(xs, bound):
    """Fraction of non-NaN entries with |x| <= bound; NaN when none."""
    within = 0
    cnt = 0
    for t in range(xs.shape[0]):
        v = xs[t]
        if not math.isnan(v):
            cnt += 1
            if abs(v) <= bound:
                within += 1
    if cnt == 0:
        return math.nan
    return within / cnt


def _paired(estimates, truths):
    e = np.ascontiguousarray(estimates, dtype=np.float64)
    v = np.ascontiguousarray(truths, dtype=np.float64)
    if e.shape != v.shape or e.ndim != 1:
        raise LengthMismatch(f"series lengths differ: {e.shape} vs {v.shape}")
    return e, v


def rel_l1(estimates, truths) -> float:
    """Mean per-step relative error in percent, zero-truth steps skipped."""
    e, v = _paired(estimates, truths)
    total, evaluated, _ = _rel_l1_acc(e, v)
    if evaluated == 0:
        raise AllTruthZero("no step has a nonzero truth")
    return 100.0 * (total / evaluated)


def abs_linf(estimates, truths) -> float:
    """Largest per-step absolute error."""
    e, v = _paired(estimates, truths)
    if e.shape[0] == 0:
        raise EmptySeries("empty series")
    return float(_abs_linf_acc(e, v))


@dataclass(frozen=True)
class TraceRow:
    """Per-step diagnostics: exact truth, estimate, and buffer state for tas.

    ``estimate`` is None before the estimator can produce one; ``k``,
    ``spread`` and ``center_offset`` are populated only for tas and only once
    its buffer has filled.
    """

    n: int
    truth: float
    estimate: float | None
    k: int | None = None
    spread: float | None = None
    center_offset: int | None = None


@dataclass(frozen=True)
class RunSummary:
    """Error metrics and diagnostics aggregated over one run."""

    rel_l1_pct: float
    abs_linf: float
    mean_spread: float
    center_within_band_frac: float
    runtime_ms: float
    steps_evaluated: int
    steps_skipped_zero_truth: int


def summarize_run(trace, band: float = 0.25, capacity: int | None = None,
                  runtime_ms: float = math.nan) -> RunSummary:
    """Aggregate a trace into a :class:`RunSummary`.

    Error terms use rows where an estimate exists.  Spread and centering use
    rows where the buffer diagnostics are populated; the centering band is
    ``|center offset| <= band * capacity``.
    """
    rows = list(trace)
    if not rows:
        raise EmptyTrace("empty trace")
    est = np.array([math.nan if r.estimate is None else r.estimate for r in rows])
    tru = np.array([r.truth for r in rows], dtype=np.float64)
    active = ~np.isnan(est)
    if not active.any():
        raise EmptyTrace("no row carries an estimate")
    e, v = est[active], tru[active]
    total, evaluated, skipped = _rel_l1_acc(e, v)
    rel = 100.0 * (total / evaluated) if evaluated else math.nan
    linf = float(_abs_linf_acc(e, v))
    spreads = np.array([math.nan if r.spread is None else r.spread for r in rows])
    mean_spread, _ = _mean_skipnan(spreads)
    centers = np.array(
        [math.nan if r.center_offset is None else float(r.center_offset) for r in rows])
    if capacity is None:
        frac = math.nan
    else:
        frac = float(_frac_within(centers, band * capacity))
    return RunSummary(
        rel_l1_pct=rel,
        abs_linf=linf,
        mean_spread=float(mean_spread),
        center_within_band_frac=frac,
        runtime_ms=runtime_ms,
        steps_evaluated=int(evaluated),
        steps_skipped_zero_truth=int(skipped),
    )
