"""Trace-driven, fully associative LRU cache simulation.

Stands in for the ideal cache model: capacity M elements, lines of B
elements, miss = line transfer.  LRU rather than an omniscient policy; the
scaling checks that consume these counts absorb the constant-factor gap.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ContractViolation

__all__ = ["simulate_cache"]


@njit(cache=True)
def _lru_misses(lines, capacity, n_line_ids):
    """Doubly-linked LRU list over dense line ids; returns the miss count."""
    head = n_line_ids          # most recent sentinel
    tail = n_line_ids + 1      # least recent sentinel
    nxt = np.full(n_line_ids + 2, -1, dtype=np.int64)
    prv = np.full(n_line_ids + 2, -1, dtype=np.int64)
    present = np.zeros(n_line_ids, dtype=np.uint8)
    nxt[head] = tail
    prv[tail] = head
    size = 0
    misses = 0
    for idx in range(lines.size):
        ln = lines[idx]
        if present[ln]:
            # unlink, then reinsert at the head
            prv[nxt[ln]] = prv[ln]
            nxt[prv[ln]] = nxt[ln]
        else:
            misses += 1
            present[ln] = 1
            size += 1
            if size > capacity:
                victim = prv[tail]
                prv[tail] = prv[victim]
                nxt[prv[victim]] = tail
                present[victim] = 0
                size -= 1
        first = nxt[head]
        nxt[ln] = first
        prv[ln] = head
        prv[first] = ln
        nxt[head] = ln
    return misses


def simulate_cache(trace, M, B, policy="LRU"):
    """Line transfers of `trace` through a fully associative M-element cache."""
    if policy != "LRU":
        raise ContractViolation(f"unsupported replacement policy {policy!r}")
    if M & (M - 1) or B & (B - 1) or M <= 0 or B <= 0:
        raise ContractViolation("M and B must be powers of two")
    if M < B * B:
        raise ContractViolation(f"tall-cache violation: M={M} < B^2={B * B}")
    if len(trace) == 0:
        return 0
    lines = trace.addrs // B
    # densify line ids so the simulator can use flat arrays
    uniq, dense = np.unique(lines, return_inverse=True)
    return int(_lru_misses(dense.astype(np.int64), M // B, int(uniq.size)))
