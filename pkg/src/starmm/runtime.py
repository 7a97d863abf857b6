"""Fork-join task execution on a small work-stealing thread pool.

Algorithms are expressed as task trees: a task spawns children with
`Executor.parallel` and returns only when they have completed.  Each worker
owns a deque; spawned children go on top of the spawning worker's deque,
the owner pops newest-first, idle workers steal oldest-first.  While a task
waits on its children it executes only tasks belonging to that same join,
so every block a worker holds nests along one root-to-leaf path of the task
tree — the discipline the space accounting relies on.  Base-case bodies
never spawn, so at most one runs per worker at any instant.

With one worker the pool degenerates to plain depth-first calls in spawn
order, with no threads involved.
"""

from __future__ import annotations

import threading

import numpy as np

from .matrix import Matrix
from .metrics import Metrics
from .pool import Pool

__all__ = ["Executor", "current_worker_index"]

_tls = threading.local()

READ = 0
WRITE = 1


def current_worker_index():
    """Index of the worker executing the calling task (0 outside the pool)."""
    return getattr(_tls, "worker", 0)


class _Frame:
    __slots__ = ("pending", "event", "exc", "lock")

    def __init__(self, pending):
        self.pending = pending
        self.event = threading.Event()
        self.exc = None
        self.lock = threading.Lock()


class _Task:
    __slots__ = ("fn", "frame")

    def __init__(self, fn, frame):
        self.fn = fn
        self.frame = frame


class Executor:
    """Owns the worker pool, the block pool, metrics, and trace plumbing."""

    def __init__(self, cfg, pool_discipline="lifo", tracer=None):
        self.cfg = cfg
        self.p = cfg.workers
        self.pool = Pool(self.p, discipline=pool_discipline)
        self.metrics = Metrics()
        self.tracer = tracer
        self._next_addr = 0
        self._addr_lock = threading.Lock()
        self._closed = False
        if self.p > 1:
            self._deques = [[] for _ in range(self.p)]
            self._dlocks = [threading.Lock() for _ in range(self.p)]
            self._work_cv = threading.Condition()
            self._shutdown = False
            self._threads = [
                threading.Thread(target=self._worker_loop, args=(i,), daemon=True)
                for i in range(self.p)
            ]
            for t in self._threads:
                t.start()

    # -- lifecycle --------------------------------------------------------

    def close(self):
        if self._closed:
            return
        self._closed = True
        if self.p > 1:
            with self._work_cv:
                self._shutdown = True
                self._work_cv.notify_all()
            for t in self._threads:
                t.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- task execution ----------------------------------------------------

    def run(self, fn):
        """Execute `fn` as the root task and block until its tree completes."""
        self.metrics.running = True
        try:
            if self.p == 1:
                prev = getattr(_tls, "worker", None)
                _tls.worker = 0
                try:
                    fn()
                finally:
                    if prev is None:
                        del _tls.worker
                    else:
                        _tls.worker = prev
            else:
                frame = _Frame(1)
                self._push_tasks(0, [_Task(fn, frame)])
                frame.event.wait()
                if frame.exc is not None:
                    raise frame.exc
        finally:
            self.metrics.running = False

    def parallel(self, thunks):
        """Run zero-argument callables as sibling tasks; return when all done."""
        if self.p == 1:
            for fn in thunks:
                fn()
            return
        w = _tls.worker
        frame = _Frame(len(thunks))
        self._push_tasks(w, [_Task(fn, frame) for fn in thunks])
        dq, lock = self._deques[w], self._dlocks[w]
        while True:
            task = None
            with lock:
                if dq and dq[-1].frame is frame:
                    task = dq.pop()
            if task is not None:
                self._exec(task)
                continue
            # remaining children (if any) were stolen; wait for their joins
            frame.event.wait()
            break
        if frame.exc is not None:
            raise frame.exc

    def _push_tasks(self, w, tasks):
        with self._dlocks[w]:
            self._deques[w].extend(tasks)
        with self._work_cv:
            self._work_cv.notify_all()

    def _exec(self, task):
        frame = task.frame
        try:
            task.fn()
        except BaseException as e:
            with frame.lock:
                if frame.exc is None:
                    frame.exc = e
        finally:
            with frame.lock:
                frame.pending -= 1
                done = frame.pending == 0
            if done:
                frame.event.set()

    def _worker_loop(self, idx):
        _tls.worker = idx
        p = self.p
        while True:
            task = None
            with self._dlocks[idx]:
                if self._deques[idx]:
                    task = self._deques[idx].pop()
            if task is None:
                for off in range(1, p):
                    v = (idx + off) % p
                    with self._dlocks[v]:
                        if self._deques[v]:
                            task = self._deques[v].pop(0)
                            break
            if task is None:
                with self._work_cv:
                    if self._shutdown:
                        return
                    self._work_cv.wait(timeout=0.02)
                continue
            self._exec(task)

    def current_worker(self):
        return current_worker_index()

    # -- temporaries -------------------------------------------------------

    def acquire_temp(self, dim, semiring, depth, mode="pooled", lazy=False, virgin=True):
        """A dim x dim scratch matrix: pooled (reused, uncleared) or raw (fresh).

        Returns (token, Matrix); pass the token back to `release_temp`.
        Virgin marking arms overwrite-on-first-touch for every tile, which is
        how uncleared blocks get initialized without Theta(dim^2) zero traffic.
        """
        if mode == "pooled":
            token = self.pool.acquire(self.current_worker(), dim * dim)
            if self.tracer is not None and token.addr is None:
                token.addr = self._bump_addr(dim * dim)
            m = token.as_matrix(dim, semiring)
        elif mode == "raw":
            m = Matrix(np.empty((dim, dim), dtype=semiring.dtype), semiring)
            self.metrics.record_raw_alloc(dim * dim)
            if self.tracer is not None:
                m.addr = self._bump_addr(dim * dim)
            token = None
        else:
            raise ValueError(f"unknown allocation mode {mode!r}")
        if virgin:
            m.ensure_table(self.cfg.base_dim).mark_virgin()
        if lazy:
            self.metrics.record_lazy_acquire(depth, dim * dim)
        return token, m

    def release_temp(self, token, depth=0, lazy=False):
        if lazy:
            size = token.size if token is not None else 0
            self.metrics.record_lazy_release(depth, size)
        if token is not None:
            self.pool.release(token)

    # -- trace support -----------------------------------------------------

    def _bump_addr(self, size):
        with self._addr_lock:
            a = self._next_addr
            self._next_addr += size
            return a

    def register_matrix(self, m):
        if self.tracer is not None and m.addr is None:
            m.addr = self._bump_addr(m.rows * m.cols)

    def trace_read(self, region):
        if self.tracer is not None:
            self.tracer.record(region.addresses(), READ)

    def trace_write(self, region):
        if self.tracer is not None:
            self.tracer.record(region.addresses(), WRITE)
