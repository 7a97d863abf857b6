"""Element-granularity access traces of serial instrumented runs.

A trace is the ordered list of element reads and writes a single-worker
execution performs, over a flat address space laid out as A, then B, then
C, then temporaries in allocation order.  Pooled reuse keeps a block's
addresses stable across acquisitions; raw mode gives every allocation a
fresh range.  Kernels emit one pass per operand block (read A, read B,
read C unless overwritten, write C), which is miss-equivalent to the
element-interleaved loop for any cache of at least a few lines.
"""

from __future__ import annotations

import numpy as np

from .errors import TooLarge
from .matrix import Config, Matrix, random_matrix
from .registry import run_algorithm
from .runtime import Executor

__all__ = ["AccessTrace", "Tracer", "record_trace"]

KIND_READ = 0
KIND_WRITE = 1

MAX_N = 512
MAX_B = 32


class AccessTrace:
    """Ordered (address, kind) records; addresses are element indices."""

    def __init__(self, addrs, kinds):
        self.addrs = np.asarray(addrs, dtype=np.int64)
        self.kinds = np.asarray(kinds, dtype=np.uint8)
        if self.addrs.shape != self.kinds.shape:
            raise ValueError("address and kind arrays differ in length")

    def __len__(self):
        return int(self.addrs.size)

    def distinct_addresses(self):
        return int(np.unique(self.addrs).size)

    def to_file(self, path):
        """Binary dump: little-endian records of (u64 address, u8 kind)."""
        rec = np.zeros(len(self), dtype=np.dtype([("addr", "<u8"), ("kind", "u1")]))
        rec["addr"] = self.addrs.astype(np.uint64)
        rec["kind"] = self.kinds
        rec.tofile(path)

    @classmethod
    def from_file(cls, path):
        rec = np.fromfile(path, dtype=np.dtype([("addr", "<u8"), ("kind", "u1")]))
        return cls(rec["addr"].astype(np.int64), rec["kind"])


class Tracer:
    """Collects per-operation address vectors emitted by the kernels."""

    def __init__(self):
        self._chunks = []

    def record(self, addrs, kind):
        self._chunks.append((np.asarray(addrs, dtype=np.int64), kind))

    def finish(self):
        if not self._chunks:
            return AccessTrace(np.empty(0, np.int64), np.empty(0, np.uint8))
        addrs = np.concatenate([c[0] for c in self._chunks])
        kinds = np.concatenate(
            [np.full(c[0].size, c[1], dtype=np.uint8) for c in self._chunks])
        return AccessTrace(addrs, kinds)


def record_trace(algo, n, b, s, mode="pooled", seed=0):
    """Deterministic element trace of a serial run of `algo` at (n, b)."""
    if n > MAX_N or b > MAX_B:
        raise TooLarge(f"trace scale capped at n<={MAX_N}, b<={MAX_B}")
    cfg = Config(base_dim=b, workers=1)
    tracer = Tracer()
    A = random_matrix(n, s, seed)
    B = random_matrix(n, s, seed + 1)
    C = Matrix.zeros(n, s)
    with Executor(cfg, tracer=tracer) as ex:
        ex.register_matrix(A)
        ex.register_matrix(B)
        ex.register_matrix(C)
        run_algorithm(ex, algo, C, A, B, s, mode=mode)
    return tracer.finish()
