"""Classical semiring matrix multiplication schedules.

Five schedules over the same eight-way quadrant recursion, differing only
in how they order tasks and where temporaries come from:

* ``co2``  — two parallel steps per level, no temporaries.
* ``co3``  — one temporary the size of the output per level, all eight
  sub-products concurrent, merge afterwards.
* ``tar``  — all eight sub-products concurrent with no intermediate join;
  each base case computes into a pooled block and merges through its
  output tile's exclusion slot.
* ``sar``  — all eight concurrent with lazy allocation: the two halves
  updating a quadrant race on a pair state, and only a half that finds its
  sibling actually running buys a temporary.
* ``star`` — tar-style levels above the switch depth, sar below it.

All entry points compute C <- C (+) A (x) B.
"""

from __future__ import annotations

import threading

from .errors import ContractViolation
from .matrix import Config
from .ops import accumulate_region, leaf_accumulate, merge_tasks, product_into

__all__ = [
    "co2", "co3", "tar_mm", "sar_mm", "star_mm",
    "atomic_accumulate", "PairState", "switch_depth",
    "PAIR_EMPTY", "PAIR_FIRST_RUNNING", "PAIR_FIRST_DONE",
]

PAIR_EMPTY = "Empty"
PAIR_FIRST_RUNNING = "FirstRunning"
PAIR_FIRST_DONE = "FirstDone"

_pair_seq = threading.Lock()
_pair_next = [0]


class PairState:
    """Atomic state shared by the two halves updating one output quadrant.

    Transitions only Empty -> FirstRunning -> FirstDone, each exactly once.
    The half that finds Empty claims the parent region; a half that finds
    FirstRunning is genuinely concurrent with its sibling and must buy a
    temporary; FirstDone means the region is free to reuse.
    """

    __slots__ = ("state", "lock", "pair_id", "_metrics")

    def __init__(self, metrics):
        with _pair_seq:
            _pair_next[0] += 1
            self.pair_id = _pair_next[0]
        self.state = PAIR_EMPTY
        self.lock = threading.Lock()
        self._metrics = metrics
        metrics.record_pair()

    def arrive(self):
        with self.lock:
            seen = self.state
            if seen == PAIR_EMPTY:
                self.state = PAIR_FIRST_RUNNING
                self._metrics.record_transition(self.pair_id, PAIR_EMPTY, PAIR_FIRST_RUNNING)
        return seen

    def finish_first(self):
        with self.lock:
            if self.state != PAIR_FIRST_RUNNING:
                raise ContractViolation(f"pair finish from state {self.state}")
            self.state = PAIR_FIRST_DONE
            self._metrics.record_transition(self.pair_id, PAIR_FIRST_RUNNING, PAIR_FIRST_DONE)


def switch_depth(p):
    """Hybrid switch depth: smallest k with 4**k >= p (ceil of half log2 p)."""
    k = 0
    while 4 ** k < p:
        k += 1
    return k


def _mm_children(C, A, B):
    """The eight quadrant sub-products; entries i and i+4 share an output."""
    out = []
    for k in (0, 1):
        for i in (0, 1):
            for j in (0, 1):
                out.append((C.quadrant(i, j), A.quadrant(i, k), B.quadrant(k, j)))
    return out


def _instrumented(ex, depth, leaf, body):
    mt = ex.metrics
    if leaf:
        def thunk():
            mt.base_enter(depth)
            try:
                body()
            finally:
                mt.base_exit(depth)
    else:
        def thunk():
            mt.task_enter(depth)
            try:
                body()
            finally:
                mt.task_exit(depth)
    return thunk


# -- CO2 -----------------------------------------------------------------

def _co2_child(ex, s, depth, C, A, B):
    if C.rows == ex.cfg.base_dim:
        return _instrumented(ex, depth, True,
                             lambda: leaf_accumulate(ex, s, C, A, B, locked=False))
    return _instrumented(ex, depth, False,
                         lambda: _co2_node(ex, s, depth, C, A, B))


def _co2_node(ex, s, depth, C, A, B):
    ch = _mm_children(C, A, B)
    ex.parallel([_co2_child(ex, s, depth + 1, *c) for c in ch[:4]])
    ex.parallel([_co2_child(ex, s, depth + 1, *c) for c in ch[4:]])


# -- CO3 -----------------------------------------------------------------

def _co3_child(ex, s, depth, C, A, B, mode):
    if C.rows == ex.cfg.base_dim:
        return _instrumented(ex, depth, True,
                             lambda: leaf_accumulate(ex, s, C, A, B, locked=False))
    return _instrumented(ex, depth, False,
                         lambda: _co3_node(ex, s, depth, C, A, B, mode))


def _co3_node(ex, s, depth, C, A, B, mode):
    m = C.rows
    token, D = ex.acquire_temp(m, s, depth, mode=mode, virgin=True)
    Dr = D.region()
    thunks = []
    for k in (0, 1):
        target = C if k == 0 else Dr
        for i in (0, 1):
            for j in (0, 1):
                tq = (target.quadrant(i, j) if k == 0 else Dr.quadrant(i, j))
                thunks.append(_co3_child(ex, s, depth + 1, tq,
                                         A.quadrant(i, k), B.quadrant(k, j), mode))
    ex.parallel(thunks)
    merge_tasks(ex, s, C, Dr, depth)
    ex.release_temp(token)


# -- TAR -----------------------------------------------------------------

def _tar_leaf(ex, s, depth, C, A, B):
    b = ex.cfg.base_dim
    token, T = ex.acquire_temp(b, s, depth, virgin=False)
    try:
        product_into(ex, s, T.region(), A, B)
        accumulate_region(ex, s, C, T.region())
    finally:
        ex.release_temp(token)


def _tar_child(ex, s, depth, C, A, B):
    if C.rows == ex.cfg.base_dim:
        return _instrumented(ex, depth, True, lambda: _tar_leaf(ex, s, depth, C, A, B))
    return _instrumented(ex, depth, False, lambda: _tar_node(ex, s, depth, C, A, B))


def _tar_node(ex, s, depth, C, A, B):
    ch = _mm_children(C, A, B)
    ex.parallel([_tar_child(ex, s, depth + 1, *c) for c in ch])


# -- SAR -----------------------------------------------------------------

def _sar_descend(ex, s, depth, C, A, B):
    if C.rows == ex.cfg.base_dim:
        leaf_accumulate(ex, s, C, A, B, locked=True)
    else:
        _sar_node(ex, s, depth, C, A, B)


def _sar_half(ex, s, depth, pair, C, A, B):
    """One half of an output pair; allocates only when truly concurrent."""
    seen = pair.arrive()
    if seen == PAIR_FIRST_RUNNING:
        m = C.rows
        token, T = ex.acquire_temp(m, s, depth, lazy=True, virgin=True)
        try:
            _sar_descend(ex, s, depth, T.region(), A, B)
            accumulate_region(ex, s, C, T.region())
        finally:
            ex.release_temp(token, depth, lazy=True)
        return
    _sar_descend(ex, s, depth, C, A, B)
    if seen == PAIR_EMPTY:
        pair.finish_first()


def _sar_node(ex, s, depth, C, A, B):
    ch = _mm_children(C, A, B)
    pairs = [PairState(ex.metrics) for _ in range(4)]
    thunks = []
    for i, (cq, aq, bq) in enumerate(ch):
        pair = pairs[i % 4]
        leaf = cq.rows == ex.cfg.base_dim
        thunks.append(_instrumented(
            ex, depth + 1, leaf,
            lambda pair=pair, cq=cq, aq=aq, bq=bq:
                _sar_half(ex, s, depth + 1, pair, cq, aq, bq)))
    ex.parallel(thunks)


# -- STAR ----------------------------------------------------------------

def _star_child(ex, s, depth, k, C, A, B):
    if C.rows == ex.cfg.base_dim:
        # reached only above the switch; use the tar base protocol
        return _instrumented(ex, depth, True, lambda: _tar_leaf(ex, s, depth, C, A, B))
    return _instrumented(ex, depth, False,
                         lambda: _star_node(ex, s, depth, k, C, A, B))


def _star_node(ex, s, depth, k, C, A, B):
    if depth >= k:
        _sar_node(ex, s, depth, C, A, B)
        return
    ch = _mm_children(C, A, B)
    ex.parallel([_star_child(ex, s, depth + 1, k, *c) for c in ch])


# -- roots and public entry points ----------------------------------------

def _classic_root(algo, ex, s, C, A, B, mode):
    """Root body dispatch; caller has validated inputs and set up tables."""
    Cr, Ar, Br = C.region(), A.region(), B.region()
    leaf = C.rows == ex.cfg.base_dim
    if algo == "co2":
        body = (lambda: leaf_accumulate(ex, s, Cr, Ar, Br, locked=False)) if leaf \
            else (lambda: _co2_node(ex, s, 0, Cr, Ar, Br))
    elif algo == "co3":
        body = (lambda: leaf_accumulate(ex, s, Cr, Ar, Br, locked=False)) if leaf \
            else (lambda: _co3_node(ex, s, 0, Cr, Ar, Br, mode))
    elif algo == "tar":
        body = (lambda: _tar_leaf(ex, s, 0, Cr, Ar, Br)) if leaf \
            else (lambda: _tar_node(ex, s, 0, Cr, Ar, Br))
    elif algo == "sar":
        body = (lambda: _sar_descend(ex, s, 0, Cr, Ar, Br))
    elif algo == "star":
        k = switch_depth(ex.p)
        if leaf:
            body = (lambda: _tar_leaf(ex, s, 0, Cr, Ar, Br)) if k > 0 \
                else (lambda: _sar_descend(ex, s, 0, Cr, Ar, Br))
        else:
            body = lambda: _star_node(ex, s, 0, k, Cr, Ar, Br)
    else:
        raise KeyError(f"unknown classical schedule {algo!r}")
    return _instrumented(ex, 0, leaf, body)


def atomic_accumulate(C, P, s, table=None, ex=None):
    """Tile-exclusive elementwise merge of P into C (C <- C (+) P).

    C must be aligned to the exclusion table's base grid.  Standalone use
    (no executor) spins up a single-worker shim for metrics plumbing.
    """
    if table is not None:
        if table.tiles_r * table.tile != C.buffer.rows:
            raise ContractViolation("exclusion table does not match C's buffer")
        C.buffer.table = table
    if ex is None:
        from .runtime import Executor
        tile = C.buffer.table.tile if C.buffer.table is not None else C.rows
        with Executor(Config(base_dim=tile, workers=1)) as shim:
            accumulate_region(shim, s, C, P)
        return
    accumulate_region(ex, s, C, P)


def _run_public(algo, C, A, B, s, cfg, mode="pooled"):
    from .registry import run_algorithm
    from .runtime import Executor
    with Executor(cfg) as ex:
        run_algorithm(ex, algo, C, A, B, s, mode=mode)


def co2(C, A, B, s, cfg):
    """C <- C (+) A (x) B; quadrant recursion in two parallel steps per level."""
    _run_public("co2", C, A, B, s, cfg)


def co3(C, A, B, s, cfg, mode="pooled"):
    """Eight-way concurrent recursion with a per-level temporary, then merge."""
    _run_public("co3", C, A, B, s, cfg, mode=mode)


def tar_mm(C, A, B, s, cfg):
    """All eight sub-products concurrent; base cases merge through tile slots."""
    _run_public("tar", C, A, B, s, cfg)


def sar_mm(C, A, B, s, cfg):
    """Eight-way concurrent recursion with lazily allocated temporaries."""
    _run_public("sar", C, A, B, s, cfg)


def star_mm(C, A, B, s, cfg):
    """tar above the switch depth (ceil of half log2 p), sar below it."""
    _run_public("star", C, A, B, s, cfg)
