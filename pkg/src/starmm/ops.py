"""Block-level operations used inside task bodies.

Shared-output writes funnel through per-tile exclusion slots: one slot per
aligned b x b output tile, entered by at most one accumulation at a time.
A tile whose virgin flag is set holds undefined data (a reused pool block,
or an output that is being overwritten rather than updated); its first
accumulation stores instead of folding and clears the flag.  Fold order is
therefore free, which is exact for the integer and tropical algebras.
"""

from __future__ import annotations

from .errors import AlignmentError, DimMismatch
from .matrix import MatrixRegion

__all__ = [
    "leaf_accumulate", "product_into", "accumulate_region",
    "merge_tasks", "mat_into", "assemble",
]


def _single_tile(region, b):
    if region.rows != b or region.cols != b:
        raise AlignmentError(f"expected a {b}x{b} tile, got {region.rows}x{region.cols}")
    if region.row0 % b or region.col0 % b:
        raise AlignmentError("tile not aligned to the base grid")
    return region.row0 // b, region.col0 // b


def leaf_accumulate(ex, s, C, A, B, locked):
    """C <- C (+) A (x) B on one base tile, honoring the virgin flag.

    `locked` routes the update through C's exclusion slot; schedules whose
    writers can overlap on a tile (TAR-descended recursion, lazy-allocation
    pairs) must pass True.
    """
    b = ex.cfg.base_dim
    ex.trace_read(A)
    ex.trace_read(B)
    prod = s.matmul(A.view(), B.view())
    tbl = C.buffer.table
    if tbl is None:
        ex.trace_read(C)
        s.fold_add(C.view(), prod)
        ex.trace_write(C)
        return
    ti, tj = _single_tile(C, b)
    if locked:
        with tbl.slot(ti, tj):
            tbl.entry_counts[ti, tj] += 1
            _store_or_fold(ex, s, C, prod, tbl, ti, tj)
        ex.metrics.count_serialization()
    else:
        _store_or_fold(ex, s, C, prod, tbl, ti, tj)


def _store_or_fold(ex, s, C, values, tbl, ti, tj):
    if tbl.virgin[ti, tj]:
        C.view()[:] = values
        tbl.virgin[ti, tj] = False
        ex.trace_write(C)
    else:
        ex.trace_read(C)
        s.fold_add(C.view(), values)
        ex.trace_write(C)


def product_into(ex, s, T, A, B):
    """T <- A (x) B, plain overwrite of a privately owned block."""
    ex.trace_read(A)
    ex.trace_read(B)
    T.view()[:] = s.matmul(A.view(), B.view())
    ex.trace_write(T)


def accumulate_region(ex, s, C, P, negate=False):
    """Tile-exclusive merge of P into C: C <- C (+) P, tile by tile.

    Concurrent callers targeting the same tile serialize on its slot; each
    entry bumps the slot counter.  With `negate` the additive inverse of P
    is merged (rings only).
    """
    if C.rows != P.rows or C.cols != P.cols:
        raise DimMismatch(f"accumulate shapes differ: {C.rows}x{C.cols} vs {P.rows}x{P.cols}")
    b = ex.cfg.base_dim
    ti0, tj0, tr, tc = C.tile_range(b)
    tbl = C.buffer.ensure_table(b)
    entries = 0
    for i in range(tr):
        for j in range(tc):
            csub = _sub(C, i, j, b)
            psub = _sub(P, i, j, b)
            ex.trace_read(psub)
            vals = psub.view()
            if negate:
                vals = s.neg(vals)
            with tbl.slot(ti0 + i, tj0 + j):
                tbl.entry_counts[ti0 + i, tj0 + j] += 1
                _store_or_fold(ex, s, csub, vals, tbl, ti0 + i, tj0 + j)
            entries += 1
    ex.metrics.count_serialization(entries)


def _sub(region, i, j, b):
    return MatrixRegion(region.buffer, region.row0 + i * b, region.col0 + j * b, b, b)


def merge_tasks(ex, s, C, D, depth):
    """Merge D into C by 2-way divide and conquer, all quadrant pairs spawned.

    The leaf merge is virgin-aware so a target inside a reused block is
    initialized by its first write.
    """
    b = ex.cfg.base_dim
    if C.rows == b:
        _merge_leaf(ex, s, C, D)
        return
    mt = ex.metrics
    thunks = []
    for i in (0, 1):
        for j in (0, 1):
            cq, dq = C.quadrant(i, j), D.quadrant(i, j)
            if cq.rows == b:
                def leaf(cq=cq, dq=dq):
                    mt.task_enter(depth + 1)
                    try:
                        _merge_leaf(ex, s, cq, dq)
                    finally:
                        mt.task_exit(depth + 1)
                thunks.append(leaf)
            else:
                def rec(cq=cq, dq=dq):
                    mt.task_enter(depth + 1)
                    try:
                        merge_tasks(ex, s, cq, dq, depth + 1)
                    finally:
                        mt.task_exit(depth + 1)
                thunks.append(rec)
    ex.parallel(thunks)


def _merge_leaf(ex, s, C, D):
    b = ex.cfg.base_dim
    tbl = C.buffer.table
    ex.trace_read(D)
    if tbl is not None:
        ti, tj = _single_tile(C, b)
        if tbl.virgin[ti, tj]:
            C.view()[:] = D.view()
            tbl.virgin[ti, tj] = False
            ex.trace_write(C)
            return
    ex.trace_read(C)
    s.fold_add(C.view(), D.view())
    ex.trace_write(C)


def mat_into(ex, s, dest, src_a, src_b=None, op="copy"):
    """Materialize a fast-multiplication operand: dest <- a, a (+) b, or a (-) b."""
    ex.trace_read(src_a)
    if op == "copy":
        dest.view()[:] = src_a.view()
    else:
        ex.trace_read(src_b)
        fn = s.add if op == "add" else s.sub
        dest.view()[:] = fn(src_a.view(), src_b.view())
    ex.trace_write(dest)


def assemble(ex, s, Cq, terms):
    """Overwrite an output quadrant with a signed combination of products.

    terms: [(region, sign), ...] with sign +1/-1; evaluated left to right.
    """
    (first, sign0), rest = terms[0], terms[1:]
    ex.trace_read(first)
    acc = first.view().copy()
    if sign0 < 0:
        acc = s.neg(acc)
    for region, sign in rest:
        ex.trace_read(region)
        fn = s.add if sign > 0 else s.sub
        acc = fn(acc, region.view())
    Cq.view()[:] = acc
    ex.trace_write(Cq)
