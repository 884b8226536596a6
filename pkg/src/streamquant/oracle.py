"""Exact running-quantile ground truth.

:class:`OracleMultiset` is an order-statistic multiset backed by an indexable
skip list: expected O(log n) insert and select-by-rank, duplicates kept.  It
is the evaluation-side component and deliberately uses O(n) memory, unlike
the bounded estimators it judges.

The rank convention everywhere in this package is ``k = ceil(q * n)``,
1-indexed from the smallest element: the q-quantile of a multiset is its
k-th smallest member, i.e. the smallest value with at least a q fraction of
the data at or below it.  Equivalently, counting from the top, the element
``floor((1 - q) * n)`` positions below the maximum.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._bits import next64 as _next64
from .errors import DuplicateValue, EmptySet, NonFiniteValue

MAX_LEVEL = 26
_NIL = np.int32(-1)
_U64 = np.uint64


def rank_index(n: int, q: float) -> int:
    """1-based rank of the q-quantile in a sorted prefix of length ``n``.

    Computed as ceil(q * n) on the IEEE double product, clamped to [1, n];
    the clamp only matters when rounding nudges q * n past an integer.
    """
    k = math.ceil(q * n)
    if k < 1:
        return 1
    if k > n:
        return n
    return k


@njit(cache=True, inline="always")
def _rank_index(n, q):
    k = np.int64(math.ceil(q * n))
    if k < 1:
        k = 1
    if k > n:
        k = n
    return k


@njit(cache=True)
def _sl_insert(key, off, fwd, span, upd, updrank, meta, rng, x):
    """Insert ``x``; meta = [size, next_node, pool_used, list_level].

    Returns 1 on success, 0 when node or pool capacity is exhausted (the
    caller grows the arrays and retries).
    """
    size, next_node, pool_used, list_level = meta[0], meta[1], meta[2], meta[3]
    if next_node >= key.shape[0] or pool_used + MAX_LEVEL > fwd.shape[0]:
        return 0
    cur = np.int64(0)
    rank_cur = np.int64(0)
    for lvl in range(list_level - 1, -1, -1):
        nxt = fwd[off[cur] + lvl]
        while nxt != _NIL and key[nxt] < x:
            rank_cur += span[off[cur] + lvl]
            cur = np.int64(nxt)
            nxt = fwd[off[cur] + lvl]
        upd[lvl] = cur
        updrank[lvl] = rank_cur

    lvl_new = 1
    bits = _next64(rng)
    while (bits & _U64(1)) == _U64(1) and lvl_new < MAX_LEVEL:
        lvl_new += 1
        bits = bits >> _U64(1)
    if lvl_new > list_level:
        for lvl in range(list_level, lvl_new):
            upd[lvl] = 0
            updrank[lvl] = 0
        list_level = lvl_new

    node = next_node
    off[node] = pool_used
    key[node] = x
    pos0 = updrank[0]
    for lvl in range(lvl_new):
        u = upd[lvl]
        nx = fwd[off[u] + lvl]
        fwd[off[node] + lvl] = nx
        fwd[off[u] + lvl] = np.int32(node)
        left = np.int32(pos0 - updrank[lvl] + 1)
        if nx == _NIL:
            span[off[node] + lvl] = 0
            span[off[u] + lvl] = left
        else:
            total = span[off[u] + lvl]
            span[off[u] + lvl] = left
            span[off[node] + lvl] = total + 1 - left
    for lvl in range(lvl_new, list_level):
        u = upd[lvl]
        if fwd[off[u] + lvl] != _NIL:
            span[off[u] + lvl] += 1

    meta[0] = size + 1
    meta[1] = next_node + 1
    meta[2] = pool_used + lvl_new
    meta[3] = list_level
    return 1


@njit(cache=True)
def _sl_select(key, off, fwd, span, meta, rank):
    """Value of 1-based ``rank``; precondition 1 <= rank <= size."""
    list_level = meta[3]
    cur = np.int64(0)
    pos = np.int64(0)
    for lvl in range(list_level - 1, -1, -1):
        while True:
            nx = fwd[off[cur] + lvl]
            if nx == _NIL:
                break
            sp = span[off[cur] + lvl]
            if pos + sp <= rank:
                pos += sp
                cur = np.int64(nx)
            else:
                break
    return key[cur]


@njit(cache=True)
def _sl_insert_select_many(key, off, fwd, span, upd, updrank, meta, rng, xs, q, out):
    """Feed ``xs`` in order, writing the running q-quantile after each insert."""
    for t in range(xs.shape[0]):
        if _sl_insert(key, off, fwd, span, upd, updrank, meta, rng, xs[t]) == 0:
            return t
        out[t] = _sl_select(key, off, fwd, span, meta, _rank_index(meta[0], q))
    return xs.shape[0]


class OracleMultiset:
    """Order-statistic multiset of every observed value (exact ground truth)."""

    def __init__(self, capacity_hint: int = 1024):
        cap = max(int(capacity_hint), 16)
        self._key = np.empty(cap + 1, np.float64)
        self._off = np.empty(cap + 1, np.int64)
        self._fwd = np.empty(self._pool_cap(cap), np.int32)
        self._span = np.empty(self._pool_cap(cap), np.int32)
        self._upd = np.empty(MAX_LEVEL, np.int64)
        self._updrank = np.empty(MAX_LEVEL, np.int64)
        # size, next free node, pool cursor, current list level
        self._meta = np.array([0, 1, MAX_LEVEL, 1], np.int64)
        self._rng = np.array([0x243F6A8885A308D3], np.uint64)
        self._off[0] = 0
        self._fwd[:MAX_LEVEL] = _NIL
        self._span[:MAX_LEVEL] = 0

    @staticmethod
    def _pool_cap(nodes: int) -> int:
        # expected 2 slots per node; 2.5x + head leaves negligible overflow odds
        return int(2.5 * nodes) + 2 * MAX_LEVEL

    def _grow(self) -> None:
        nodes = (self._key.shape[0] - 1) * 2
        key = np.empty(nodes + 1, np.float64)
        off = np.empty(nodes + 1, np.int64)
        key[: self._key.shape[0]] = self._key
        off[: self._off.shape[0]] = self._off
        fwd = np.empty(self._pool_cap(nodes), np.int32)
        span = np.empty(self._pool_cap(nodes), np.int32)
        fwd[: self._fwd.shape[0]] = self._fwd
        span[: self._span.shape[0]] = self._span
        self._key, self._off, self._fwd, self._span = key, off, fwd, span

    def __len__(self) -> int:
        return int(self._meta[0])

    @property
    def n(self) -> int:
        return len(self)

    def insert(self, x: float) -> None:
        """Add one copy of ``x``; duplicates are kept."""
        v = float(x)
        if not math.isfinite(v):
            raise NonFiniteValue(f"oracle value must be finite, got {x!r}")
        while not _sl_insert(self._key, self._off, self._fwd, self._span,
                             self._upd, self._updrank, self._meta, self._rng, v):
            self._grow()

    def insert_many(self, xs) -> None:
        arr = np.ascontiguousarray(xs, dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NonFiniteValue(f"non-finite value at position {bad[0]}")
        for v in arr:
            while not _sl_insert(self._key, self._off, self._fwd, self._span,
                                 self._upd, self._updrank, self._meta, self._rng, v):
                self._grow()

    def select(self, rank: int) -> float:
        """1-based order statistic: the ``rank``-th smallest element."""
        size = len(self)
        if size == 0:
            raise EmptySet("select on an empty multiset")
        if not 1 <= rank <= size:
            raise IndexError(f"rank {rank} out of range 1..{size}")
        return float(_sl_select(self._key, self._off, self._fwd, self._span,
                                self._meta, np.int64(rank)))

    def quantile(self, q: float) -> float:
        """Exact q-quantile: the element of rank ``ceil(q * n)``."""
        if len(self) == 0:
            raise EmptySet("quantile of an empty multiset")
        if not 0.0 < q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {q}")
        return self.select(rank_index(len(self), q))

    def running_quantiles(self, xs, q: float) -> np.ndarray:
        """Insert ``xs`` in order, returning the exact quantile after each step."""
        arr = np.ascontiguousarray(xs, dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NonFiniteValue(f"non-finite value at position {bad[0]}")
        out = np.empty(arr.shape[0], np.float64)
        done = 0
        while done < arr.shape[0]:
            done += _sl_insert_select_many(
                self._key, self._off, self._fwd, self._span,
                self._upd, self._updrank, self._meta, self._rng,
                arr[done:], q, out[done:])
            if done < arr.shape[0]:
                self._grow()
        return out


def rank_step_check(stream, q: float) -> bool:
    """Verify the per-datum rank-step bound on a distinct-value stream.

    Feeds the stream one datum at a time; after each arrival the 1-based rank
    of the running q-quantile is ``rank_index(n, q)``, which depends on the
    data only through ``n`` once values are distinct.  Returns True iff every
    step of that rank lies in {0, 1}.  Raises DuplicateValue when the
    distinct-values precondition is violated.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    seen = set()
    n = 0
    prev_k = None
    ok = True
    for x in stream:
        v = float(x)
        if not math.isfinite(v):
            raise NonFiniteValue(f"stream value must be finite, got {x!r}")
        if v in seen:
            raise DuplicateValue(f"repeated stream value {v!r}")
        seen.add(v)
        n += 1
        k = rank_index(n, q)
        if prev_k is not None and not 0 <= k - prev_k <= 1:
            ok = False
        prev_k = k
    return ok
