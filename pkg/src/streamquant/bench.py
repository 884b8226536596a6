"""Benchmark harness: stream ingestion, estimator grid replay, report emission.

Each grid cell (estimator, q, m) replays the stream once, maintaining the
exact ground truth and the estimator in lockstep.  The ground truth lives in
the harness, not in the estimators, so the estimators only ever see bounded
memory while the oracle side may use O(n): the harness materializes the
stream once into the oracle's buffer and ranks it, then answers running
order-statistic queries through a Fenwick tree over those ranks (the same
exact values an incremental order-statistic multiset would produce).

Outputs are deterministic given the config: per-cell seeds are derived as
``seed XOR fnv1a64("estimator|q|m")``, so results do not depend on cell
scheduling.  Only the runtime column varies between identical runs.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from numba import njit

from .baselines import _eq_estimate, _eq_observe, _p2_observe, _res_observe
from .core import KINDS, MIN_CAPACITY
from .errors import ConfigError, NonFiniteValue, ParseError
from .metrics import RunSummary, TraceRow, _frac_within, _mean_skipnan, _rel_l1_acc, _abs_linf_acc
from .oracle import _rank_index
from .streams import StreamSpec, materialize
from .tas import _tas_locate0, _tas_observe

REPORT_HEADER = "estimator,q,m,rel_l1_pct,abs_linf,mean_spread,center_frac,steps,skipped_zero,runtime_ms"
TRACE_HEADER = "n,truth,estimate,k,spread,center_offset"

_KIND_CODE = {"tas": 0, "p2": 1, "reservoir": 2, "eqhist": 3}

_IO_STATS = {"stream_reads": 0}


def stream_read_count() -> int:
    """Number of stream files physically read since import (test hook)."""
    return _IO_STATS["stream_reads"]


# --- ingestion -----------------------------------------------------------------

def _check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValue(f"non-finite value at {what} {bad[0] + 1}: {arr[bad[0]]!r}")
    return arr


def _load_array(path, fmt: str = "text") -> np.ndarray:
    """Read a whole stream file into the oracle's buffer (one physical read)."""
    path = Path(path)
    _IO_STATS["stream_reads"] += 1
    if fmt == "f64le":
        arr = np.fromfile(path, dtype="<f8").astype(np.float64)
        return _check_finite(arr, "position")
    if fmt != "text":
        raise ConfigError(f"unknown stream format {fmt!r}; expected 'text' or 'f64le'")
    lines = path.read_text().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    start = 0
    if lines:
        try:
            float(lines[0])
        except ValueError:
            start = 1  # single header line
    body = lines[start:]
    try:
        arr = np.array(body, dtype=np.float64)
    except ValueError:
        for i, s in enumerate(body):
            try:
                float(s)
            except ValueError:
                raise ParseError(f"cannot parse {s!r} on line {start + i + 1}",
                                 line=start + i + 1) from None
        raise
    return _check_finite(arr, "line")


def load_stream(path, fmt: str = "text") -> Iterator[float]:
    """Yield the file's finite values in order."""
    arr = _load_array(path, fmt)
    return iter(arr.tolist())


def write_stream(arr: np.ndarray, path, fmt: str = "text") -> None:
    """Write a stream to file in one of the ingestible formats."""
    path = Path(path)
    if fmt == "f64le":
        np.asarray(arr, dtype="<f8").tofile(path)
    elif fmt == "text":
        with open(path, "w") as fh:
            fh.writelines(repr(float(v)) + "\n" for v in arr)
    else:
        raise ConfigError(f"unknown stream format {fmt!r}")


# --- configuration ---------------------------------------------------------------

@dataclass
class BenchConfig:
    """One benchmark invocation: stream source plus the estimator grid."""

    source: StreamSpec | str | Path
    fmt: str = "text"
    quantiles: tuple = (0.95,)
    capacities: tuple = (100,)
    estimators: tuple = ("tas",)
    trace_every: int = 1
    seed: int = 0
    report_path: str | Path | None = None
    trace_dir: str | Path | None = None
    band: float = 0.25
    jobs: int = 1

    def __post_init__(self):
        self.quantiles = tuple(float(q) for q in self.quantiles)
        self.capacities = tuple(int(m) for m in self.capacities)
        self.estimators = tuple(self.estimators)
        if not self.quantiles or not self.capacities or not self.estimators:
            raise ConfigError("quantiles, capacities and estimators must be nonempty")
        for q in self.quantiles:
            if not 0.0 < q < 1.0:
                raise ConfigError(f"quantile must lie in (0, 1), got {q}")
        for m in self.capacities:
            if m < MIN_CAPACITY:
                raise ConfigError(f"capacity must be >= {MIN_CAPACITY}, got {m}")
        for e in self.estimators:
            if e not in KINDS:
                raise ConfigError(f"unknown estimator {e!r}; expected subset of {KINDS}")
        if int(self.trace_every) < 1:
            raise ConfigError(f"trace_every must be >= 1, got {self.trace_every}")
        self.trace_every = int(self.trace_every)
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")


@dataclass(frozen=True)
class ReportRow:
    """One report line: grid coordinates plus the run summary."""

    estimator: str
    q: float
    m: int
    summary: RunSummary


def _fnv1a64(s: str) -> int:
    h = 0xCBF29CE484222325
    for b in s.encode():
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def cell_seed(seed: int, estimator: str, q: float, m: int) -> int:
    """Scheduling-independent per-cell seed."""
    return (seed ^ _fnv1a64(f"{estimator}|{q!r}|{m}")) & 0xFFFFFFFFFFFFFFFF


# --- fused replay ----------------------------------------------------------------

@njit(cache=True, nogil=True)
def _replay(stream, order, q, m, kind, seed, truths, estimates, spreads, centers, ks):
    """Single-pass lockstep replay of oracle + one estimator over the stream.

    ``order`` is the stable argsort of ``stream``.  Output arrays are
    NaN-prefilled; diagnostics are written only where defined (estimates from
    the first step the estimator is ready, buffer diagnostics once the tas
    buffer has filled).
    """
    n = stream.shape[0]
    rank_of = np.empty(n, np.int64)
    for j in range(n):
        rank_of[order[j]] = j + 1
    tree = np.zeros(n + 1, np.int64)
    log = 0
    while (np.int64(1) << (log + 1)) <= n:
        log += 1

    # estimator state (only the selected kind's arrays are touched)
    values = np.empty(m, np.float64)
    counts = np.empty(m, np.float64)
    size = 0
    nobs = 0
    h = np.zeros(5, np.float64)
    npos = np.zeros(5, np.int64)
    dpos = np.empty(5, np.float64)
    dpos[0] = 1.0
    dpos[1] = 1.0 + 2.0 * q
    dpos[2] = 1.0 + 4.0 * q
    dpos[3] = 3.0 + 2.0 * q
    dpos[4] = 5.0
    inc = np.empty(5, np.float64)
    inc[0] = 0.0
    inc[1] = q / 2.0
    inc[2] = q
    inc[3] = (1.0 + q) / 2.0
    inc[4] = 1.0
    warm = np.zeros(5, np.float64)
    p2n = 0
    buf = np.empty(m, np.float64)
    srt = np.empty(m, np.float64)
    rng = np.empty(1, np.uint64)
    rng[0] = seed
    filled = 0
    rn = 0
    bins = np.zeros(m, np.float64)
    tmp = np.zeros(m, np.float64)
    emeta = np.zeros(3, np.float64)

    for t in range(n):
        x = stream[t]

        i = rank_of[t]
        while i <= n:
            tree[i] += 1
            i += i & (-i)
        rk = _rank_index(t + 1, q)
        pos = np.int64(0)
        rem = rk
        step = np.int64(1) << log
        while step > 0:
            probe = pos + step
            if probe <= n and tree[probe] < rem:
                pos = probe
                rem -= tree[probe]
            step >>= 1
        truths[t] = stream[order[pos]]

        if kind == 0:
            size = _tas_observe(values, counts, size, nobs, q, m, x)
            nobs += 1
            k0 = _tas_locate0(values, counts, size, nobs, q)
            estimates[t] = values[k0]
            if size == m:
                spreads[t] = values[size - 1] - values[0]
                ks[t] = np.float64(k0 + 1)
                centers[t] = np.float64((k0 + 1) - (size + 1) // 2)
        elif kind == 1:
            p2n = _p2_observe(h, npos, dpos, inc, warm, p2n, x)
            if p2n >= 5:
                estimates[t] = h[2]
        elif kind == 2:
            rn, filled = _res_observe(buf, srt, rn, filled, rng, m, x)
            estimates[t] = srt[_rank_index(filled, q) - 1]
        else:
            _eq_observe(bins, tmp, emeta, m, x)
            estimates[t] = _eq_estimate(bins, emeta, m, q)
    return 0


def _summary_from_arrays(truths, estimates, spreads, centers, band, m,
                         runtime_ms) -> RunSummary:
    active = ~np.isnan(estimates)
    if not active.any():
        raise ConfigError("stream too short for the estimator to warm up")
    e = np.ascontiguousarray(estimates[active])
    v = np.ascontiguousarray(truths[active])
    total, evaluated, skipped = _rel_l1_acc(e, v)
    rel = 100.0 * (total / evaluated) if evaluated else math.nan
    linf = float(_abs_linf_acc(e, v))
    mean_spread, _ = _mean_skipnan(spreads)
    frac = float(_frac_within(centers, band * m))
    return RunSummary(
        rel_l1_pct=rel,
        abs_linf=linf,
        mean_spread=float(mean_spread),
        center_within_band_frac=frac,
        runtime_ms=runtime_ms,
        steps_evaluated=int(evaluated),
        steps_skipped_zero_truth=int(skipped),
    )


def _run_cell(stream, order, estimator, q, m, seed, band):
    n = stream.shape[0]
    truths = np.empty(n, np.float64)
    estimates = np.full(n, np.nan)
    spreads = np.full(n, np.nan)
    centers = np.full(n, np.nan)
    ks = np.full(n, np.nan)
    t0 = time.perf_counter()
    _replay(stream, order, q, m, _KIND_CODE[estimator], np.uint64(seed),
            truths, estimates, spreads, centers, ks)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    summary = _summary_from_arrays(truths, estimates, spreads, centers,
                                   band, m, runtime_ms)
    return summary, truths, estimates, spreads, centers, ks


def trace_rows(truths, estimates, spreads, centers, ks,
               trace_every: int = 1) -> list[TraceRow]:
    """Materialize TraceRows at the emission stride (n = stride, 2*stride, ...)."""
    rows = []
    for t in range(trace_every - 1, truths.shape[0], trace_every):
        rows.append(TraceRow(
            n=t + 1,
            truth=float(truths[t]),
            estimate=None if math.isnan(estimates[t]) else float(estimates[t]),
            k=None if math.isnan(ks[t]) else int(ks[t]),
            spread=None if math.isnan(spreads[t]) else float(spreads[t]),
            center_offset=None if math.isnan(centers[t]) else int(centers[t]),
        ))
    return rows


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def trace_path(trace_dir, estimator: str, q: float, m: int) -> Path:
    return Path(trace_dir) / f"{estimator}_q{q!r}_m{m}.csv"


def _write_trace(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for r in rows:
            fh.write(",".join((str(r.n), _fmt(r.truth), _fmt(r.estimate),
                               _fmt(r.k), _fmt(r.spread), _fmt(r.center_offset))) + "\n")


def read_trace(path) -> list[TraceRow]:
    """Parse a trace file back into rows (inverse of the trace writer)."""
    rows = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != TRACE_HEADER:
            raise ParseError(f"unexpected trace header {header!r}", line=1)
        for line in fh:
            f = line.rstrip("\n").split(",")
            rows.append(TraceRow(
                n=int(f[0]),
                truth=float(f[1]),
                estimate=float(f[2]) if f[2] else None,
                k=int(f[3]) if f[3] else None,
                spread=float(f[4]) if f[4] else None,
                center_offset=int(f[5]) if f[5] else None,
            ))
    return rows


def run_benchmark(config: BenchConfig) -> list[ReportRow]:
    """Replay every grid cell; emit report rows and optional trace files."""
    if isinstance(config.source, StreamSpec):
        stream = materialize(config.source)
    else:
        stream = _load_array(config.source, config.fmt)
    if stream.shape[0] == 0:
        raise ConfigError("empty stream")
    order = np.argsort(stream, kind="stable")
    if config.trace_dir is not None:
        Path(config.trace_dir).mkdir(parents=True, exist_ok=True)

    cells = [(e, q, m) for e in config.estimators
             for q in config.quantiles for m in config.capacities]

    def work(cell):
        e, q, m = cell
        summary, truths, estimates, spreads, centers, ks = _run_cell(
            stream, order, e, q, m, cell_seed(config.seed, e, q, m), config.band)
        if config.trace_dir is not None:
            rows = trace_rows(truths, estimates, spreads, centers, ks,
                              config.trace_every)
            _write_trace(trace_path(config.trace_dir, e, q, m), rows)
        return ReportRow(estimator=e, q=q, m=m, summary=summary)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(work, cells))
    else:
        rows = [work(c) for c in cells]

    if config.report_path is not None:
        write_report(rows, config.report_path)
    return rows


def write_report(rows, path) -> None:
    """Write the report CSV; refuses to create a file for an empty row set."""
    rows = list(rows)
    if not rows:
        raise ConfigError("no report rows to write")
    with open(path, "w") as fh:
        fh.write(REPORT_HEADER + "\n")
        for r in rows:
            s = r.summary
            fh.write(",".join((
                r.estimator, repr(r.q), str(r.m),
                _fmt(s.rel_l1_pct), _fmt(s.abs_linf), _fmt(s.mean_spread),
                _fmt(s.center_within_band_frac), str(s.steps_evaluated),
                str(s.steps_skipped_zero_truth), _fmt(s.runtime_ms))) + "\n")
