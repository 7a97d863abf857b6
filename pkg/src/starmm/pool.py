"""Per-worker LIFO memory pool.

Same-size requests issued on the same worker hand back the most recently
released block, so a request sequence that nests like a stack reuses one
physical block forever.  Reused blocks are *not* cleared: callers own
first-write initialization (see the tile virgin flags in `matrix`).

Each worker touches only its own free stacks, so acquire/release need no
cross-worker synchronization; only the shared counters take a lock.
"""

from __future__ import annotations

import threading
from math import isqrt

import numpy as np

from .errors import AllocFailure, ContractViolation
from .matrix import Matrix

__all__ = ["BlockHandle", "Pool"]

ELEMENT_BYTES = 8


class BlockHandle:
    """A pooled buffer of `size` 64-bit elements owned by one worker."""

    _next_id = 0

    def __init__(self, owner, size):
        BlockHandle._next_id += 1
        self.block_id = BlockHandle._next_id
        self.owner = owner
        self.size = size
        self.issued = False
        self.addr = None            # trace address, assigned at first allocation
        try:
            self.raw = np.empty(size, dtype=np.int64)
        except MemoryError as e:
            raise AllocFailure(f"cannot allocate {size} elements") from e
        self._matrices = {}

    def as_matrix(self, dim, semiring):
        """View the block as a dim x dim matrix of the given algebra."""
        key = (dim, semiring.id)
        m = self._matrices.get(key)
        if m is None:
            if dim * dim > self.size:
                raise ContractViolation(f"block of {self.size} cannot hold {dim}x{dim}")
            view = self.raw[:dim * dim].view(semiring.dtype).reshape(dim, dim)
            m = Matrix.__new__(Matrix)
            m.data = view
            m.semiring = semiring
            m.addr = self.addr
            m.table = None
            self._matrices[key] = m
        m.addr = self.addr
        return m

    def __repr__(self):
        state = "issued" if self.issued else "pooled"
        return f"BlockHandle(#{self.block_id}, w{self.owner}, {self.size} elems, {state})"


class Pool:
    """LIFO block pool sharded by (worker, exact size)."""

    def __init__(self, workers, discipline="lifo"):
        if discipline not in ("lifo", "fifo"):
            raise ContractViolation(f"unknown pool discipline {discipline!r}")
        self.workers = workers
        self.discipline = discipline      # "fifo" is a test sabotage hook
        self._stacks = [dict() for _ in range(workers)]   # worker -> size -> [handles]
        self._lock = threading.Lock()
        self._reset_counters()

    def _reset_counters(self):
        self.total_allocated_bytes = 0
        self.issued_bytes = 0
        self.high_water_bytes = 0
        self.fresh_count = 0
        self.reuse_count = 0
        self._issued_per_worker = [0] * self.workers
        self._hw_per_worker = [0] * self.workers
        self.events = []        # (op, worker, size, block_id, fresh)

    def acquire(self, worker, size):
        """Pop the newest pooled (worker, size) block, or allocate fresh."""
        if size <= 0:
            raise ContractViolation(f"acquire size must be positive, got {size}")
        if not (0 <= worker < self.workers):
            raise ContractViolation(f"worker {worker} out of range")
        stack = self._stacks[worker].get(size)
        if stack:
            h = stack.pop() if self.discipline == "lifo" else stack.pop(0)
            fresh = False
        else:
            h = BlockHandle(worker, size)
            fresh = True
        h.issued = True
        nbytes = size * ELEMENT_BYTES
        with self._lock:
            if fresh:
                self.fresh_count += 1
                self.total_allocated_bytes += nbytes
            else:
                self.reuse_count += 1
            self.issued_bytes += nbytes
            self.high_water_bytes = max(self.high_water_bytes, self.issued_bytes)
            w = self._issued_per_worker
            w[worker] += nbytes
            self._hw_per_worker[worker] = max(self._hw_per_worker[worker], w[worker])
            self.events.append(("acquire", worker, size, h.block_id, fresh))
        return h

    def release(self, handle, worker=None):
        """Push an issued block back onto its (worker, size) stack."""
        if not handle.issued:
            raise ContractViolation(f"double release of {handle!r}")
        releaser = handle.owner if worker is None else worker
        if releaser != handle.owner:
            raise ContractViolation(
                f"block owned by worker {handle.owner} released on worker {releaser}")
        handle.issued = False
        self._stacks[handle.owner].setdefault(handle.size, []).append(handle)
        nbytes = handle.size * ELEMENT_BYTES
        with self._lock:
            self.issued_bytes -= nbytes
            self._issued_per_worker[handle.owner] -= nbytes
            self.events.append(("release", handle.owner, handle.size, handle.block_id, False))

    def high_water(self):
        """(max simultaneous issued bytes, per-worker breakdown) since reset."""
        with self._lock:
            return self.high_water_bytes, dict(enumerate(self._hw_per_worker))

    @property
    def high_water_elements(self):
        return self.high_water_bytes // ELEMENT_BYTES

    def acquire_square(self, worker, dim, semiring):
        """Acquire a dim x dim block and hand back (handle, matrix view)."""
        h = self.acquire(worker, dim * dim)
        return h, h.as_matrix(dim, semiring)

    def reset(self):
        """Drain every stack and zero all counters (between benchmark runs)."""
        with self._lock:
            if self.issued_bytes:
                raise ContractViolation(
                    f"reset with {self.issued_bytes} bytes still issued")
        self._stacks = [dict() for _ in range(self.workers)]
        with self._lock:
            self._reset_counters()

    def snapshot_counts(self):
        with self._lock:
            return {
                "total_allocated_bytes": self.total_allocated_bytes,
                "issued_bytes": self.issued_bytes,
                "high_water_bytes": self.high_water_bytes,
                "fresh_count": self.fresh_count,
                "reuse_count": self.reuse_count,
                "high_water_per_worker": dict(enumerate(self._hw_per_worker)),
            }


def square_dim(size):
    d = isqrt(size)
    return d if d * d == size else None
