"""Bounded-memory running-quantile estimation for non-stationary streams.

Estimators (all single-pass, constant memory):

- ``tas``        targeted adaptive sample (the adaptive ordered buffer)
- ``p2``         five-marker parabolic-interpolation estimator
- ``reservoir``  uniform random sample
- ``eqhist``     equispaced adjustable histogram

plus an exact O(n)-memory order-statistic oracle for ground truth, seeded
synthetic stream generators, error metrics, and a benchmark harness exposed
through the ``bench`` CLI.
"""

from .baselines import EquispacedHistogram, P2Quantile, ReservoirSample
from .bench import BenchConfig, ReportRow, load_stream, run_benchmark, write_report
from .core import KINDS, QuantileEstimator, QuantileSpec, create_estimator, make_spec
from .metrics import RunSummary, TraceRow, abs_linf, rel_l1, summarize_run
from .oracle import OracleMultiset, rank_index, rank_step_check
from .streams import (
    SegmentSpec,
    StreamSpec,
    gen_burst_preset,
    gen_heavy_preset,
    gen_stationary_preset,
    gen_stream,
    materialize,
)
from .tas import TargetedAdaptiveSample

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "EquispacedHistogram",
    "KINDS",
    "OracleMultiset",
    "P2Quantile",
    "QuantileEstimator",
    "QuantileSpec",
    "ReportRow",
    "ReservoirSample",
    "RunSummary",
    "SegmentSpec",
    "StreamSpec",
    "TargetedAdaptiveSample",
    "TraceRow",
    "abs_linf",
    "create_estimator",
    "gen_burst_preset",
    "gen_heavy_preset",
    "gen_stationary_preset",
    "gen_stream",
    "load_stream",
    "make_spec",
    "materialize",
    "rank_index",
    "rank_step_check",
    "rel_l1",
    "run_benchmark",
    "summarize_run",
    "write_report",
]
