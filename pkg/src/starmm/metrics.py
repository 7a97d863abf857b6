"""Runtime instrumentation: concurrency gauges, allocation logs, counters.

The depth gauges measure how many tasks of the same recursion depth are
live at once; the base-case gauge is the load-bearing one (leaf tasks can
never stall, so it must stay at or below the worker count).  Interior
depths are reported, not asserted.
"""

from __future__ import annotations

import threading
from dataclasses import asdict, dataclass, field

from .errors import ContractViolation, InternalError

__all__ = ["Metrics", "MetricsSnapshot"]


@dataclass
class MetricsSnapshot:
    per_depth_max: dict = field(default_factory=dict)
    base_case_max: int = 0
    pool_high_water_bytes: int = 0
    pool_fresh_count: int = 0
    pool_reuse_count: int = 0
    tile_serializations: int = 0
    pair_transitions: int = 0
    pair_count: int = 0
    lazy_temp_acquires: int = 0
    raw_alloc_count: int = 0
    raw_alloc_elements: int = 0

    def to_dict(self):
        d = asdict(self)
        d["per_depth_max"] = {str(k): v for k, v in sorted(self.per_depth_max.items())}
        return d


class Metrics:
    """Counters shared by every worker of one executor; lock-synchronized."""

    def __init__(self):
        self._lock = threading.Lock()
        self.running = False
        self._zero()

    def _zero(self):
        self._depth_cur = {}
        self._depth_max = {}
        self._base_cur = 0
        self.base_case_max = 0
        self.tile_serializations = 0
        self.pair_events = []       # (pair_id, old_state, new_state)
        self.pair_count = 0
        self.lazy_temp_acquires = 0
        self.raw_alloc_count = 0
        self.raw_alloc_elements = 0
        self.alloc_log = []         # (seq, depth, size_elements, +1/-1)
        self._alloc_seq = 0

    # -- gauges ---------------------------------------------------------

    def task_enter(self, depth):
        with self._lock:
            cur = self._depth_cur.get(depth, 0) + 1
            self._depth_cur[depth] = cur
            if cur > self._depth_max.get(depth, 0):
                self._depth_max[depth] = cur

    def task_exit(self, depth):
        with self._lock:
            cur = self._depth_cur.get(depth, 0) - 1
            if cur < 0:
                raise InternalError(f"unbalanced task_exit at depth {depth}")
            self._depth_cur[depth] = cur

    def base_enter(self, depth):
        with self._lock:
            cur = self._depth_cur.get(depth, 0) + 1
            self._depth_cur[depth] = cur
            if cur > self._depth_max.get(depth, 0):
                self._depth_max[depth] = cur
            self._base_cur += 1
            if self._base_cur > self.base_case_max:
                self.base_case_max = self._base_cur

    def base_exit(self, depth):
        with self._lock:
            self._base_cur -= 1
            if self._base_cur < 0:
                raise InternalError("unbalanced base_exit")
            cur = self._depth_cur.get(depth, 0) - 1
            if cur < 0:
                raise InternalError(f"unbalanced task_exit at depth {depth}")
            self._depth_cur[depth] = cur

    # -- event counters --------------------------------------------------

    def count_serialization(self, n=1):
        with self._lock:
            self.tile_serializations += n

    def record_pair(self):
        with self._lock:
            self.pair_count += 1

    def record_transition(self, pair_id, old, new):
        with self._lock:
            self.pair_events.append((pair_id, old, new))

    def record_lazy_acquire(self, depth, size):
        with self._lock:
            self.lazy_temp_acquires += 1
            self._alloc_seq += 1
            self.alloc_log.append((self._alloc_seq, depth, size, +1))

    def record_lazy_release(self, depth, size):
        with self._lock:
            self._alloc_seq += 1
            self.alloc_log.append((self._alloc_seq, depth, size, -1))

    def record_raw_alloc(self, elements):
        with self._lock:
            self.raw_alloc_count += 1
            self.raw_alloc_elements += elements

    # -- lifecycle --------------------------------------------------------

    def snapshot(self, pool=None):
        """Point-in-time copy; meant to be taken between runs."""
        with self._lock:
            snap = MetricsSnapshot(
                per_depth_max=dict(self._depth_max),
                base_case_max=self.base_case_max,
                tile_serializations=self.tile_serializations,
                pair_transitions=len(self.pair_events),
                pair_count=self.pair_count,
                lazy_temp_acquires=self.lazy_temp_acquires,
                raw_alloc_count=self.raw_alloc_count,
                raw_alloc_elements=self.raw_alloc_elements,
            )
        if pool is not None:
            counts = pool.snapshot_counts()
            snap.pool_high_water_bytes = counts["high_water_bytes"]
            snap.pool_fresh_count = counts["fresh_count"]
            snap.pool_reuse_count = counts["reuse_count"]
        return snap

    def reset(self):
        with self._lock:
            if self.running:
                raise ContractViolation("metrics reset during an active run")
            self._zero()
