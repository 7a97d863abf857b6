"""Explicit task-DAG construction and the longest-path span oracle.

`build_dag` symbolically unrolls a schedule at (n, b) into its worst-case
concurrency structure (every lazy pair is assumed truly concurrent, so the
temporary-and-merge path always exists).  Nodes carry a span cost and a
work cost under the same unit conventions as the recurrence evaluator;
fork/join plumbing nodes cost zero.  Serialization appears as edges: the
per-tile entry chains of the tar-style schedules, and the whole-subtree
ordering of same-quadrant halves above a hybrid's switch depth.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .classic import switch_depth
from .errors import InternalError, TooLarge
from .registry import ALGORITHMS
from .strassen import C_FORMULAS, S_DEFS, T_DEFS

__all__ = ["TaskDag", "DagNode", "build_dag", "longest_path"]

MAX_RATIO = 64          # oracle scale: n/b above this is refused


@dataclass(frozen=True)
class DagNode:
    kind: str           # base, tar-base, madd, accum, mat, assembly, fork, join
    depth: int
    span_cost: int
    work_cost: int


@dataclass
class TaskDag:
    algo: str
    n: int
    b: int
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    def add_node(self, kind, depth, span_cost, work_cost):
        self.nodes.append(DagNode(kind, depth, span_cost, work_cost))
        return len(self.nodes) - 1

    def add_edge(self, u, v):
        self.edges.append((u, v))

    def count(self, kind):
        return sum(1 for nd in self.nodes if nd.kind == kind)

    def total_work(self):
        return sum(nd.work_cost for nd in self.nodes)

    def successors(self):
        succ = [[] for _ in self.nodes]
        indeg = [0] * len(self.nodes)
        for u, v in self.edges:
            succ[u].append(v)
            indeg[v] += 1
        return succ, indeg


def longest_path(dag):
    """Exact critical-path cost over node span costs; cycles are an error."""
    succ, indeg = dag.successors()
    nodes = dag.nodes
    dist = [nd.span_cost for nd in nodes]
    ready = deque(i for i, d in enumerate(indeg) if d == 0)
    seen = 0
    best = 0
    while ready:
        u = ready.popleft()
        seen += 1
        best = max(best, dist[u])
        for v in succ[u]:
            cand = dist[u] + nodes[v].span_cost
            if cand > dist[v]:
                dist[v] = cand
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if seen != len(nodes):
        raise InternalError("dependency graph contains a cycle")
    return best


class _Builder:
    def __init__(self, algo, n, b):
        self.dag = TaskDag(algo, n, b)
        self.b = b
        self.chains = {}        # (tile_r, tile_c) -> [node ids in issue order]

    def zero(self, kind, depth):
        return self.dag.add_node(kind, depth, 0, 0)

    def chain_leaf(self, nid, tr, tc):
        self.chains.setdefault((tr, tc), []).append(nid)

    def link_chains(self):
        for chain in self.chains.values():
            for u, v in zip(chain, chain[1:]):
                self.dag.add_edge(u, v)

    # generic composite helpers -------------------------------------------

    def wrap(self, depth, parts):
        """entry -> every part entry, every part exit -> exit."""
        e = self.zero("fork", depth)
        x = self.zero("join", depth)
        for pe, px in parts:
            self.dag.add_edge(e, pe)
            self.dag.add_edge(px, x)
        return e, x


def _mm_child_tiles(tr, tc, half_tiles):
    """Output tile origins of the eight quadrant sub-products (issue order)."""
    out = []
    for _k in (0, 1):
        for i in (0, 1):
            for j in (0, 1):
                out.append((tr + i * half_tiles, tc + j * half_tiles))
    return out


def build_dag(algo, n, b, p):
    """Explicit dependency graph of `algo` at (n, b) for a p-worker run."""
    if algo not in ALGORITHMS:
        raise KeyError(f"unknown algorithm {algo!r}")
    if n % b or n // b > MAX_RATIO:
        raise TooLarge(f"n/b = {n}/{b} exceeds the oracle scale {MAX_RATIO}")
    bld = _Builder(algo, n, b)
    k = switch_depth(p)
    dag = bld.dag
    builders = {
        "co2": lambda: _co2(bld, n, 0),
        "co3": lambda: _co3(bld, n, 0),
        "tar": lambda: _tar(bld, n, 0, 0, 0),
        "sar": lambda: _sar(bld, n, 0),
        "star": lambda: _star(bld, n, 0, k, 0, 0),
        "strassen": lambda: _strassen(bld, n, 0),
        "sar-strassen": lambda: _sar_strassen(bld, n, 0),
        "star-strassen-1": lambda: _star1(bld, n, 0, k, 0, 0),
        "star-strassen-2": lambda: _star2(bld, n, 0, k),
    }
    builders[algo]()
    bld.link_chains()
    return dag


# -- classical ---------------------------------------------------------------

def _base(bld, depth):
    b = bld.b
    return bld.dag.add_node("base", depth, 1, b ** 3)


def _tar_base(bld, depth, tr, tc):
    b = bld.b
    nid = bld.dag.add_node("tar-base", depth, 1, b ** 3 + b ** 2)
    bld.chain_leaf(nid, tr, tc)
    return nid


def _co2(bld, m, depth):
    if m == bld.b:
        nid = _base(bld, depth)
        return nid, nid
    parts = [_co2(bld, m // 2, depth + 1) for _ in range(8)]
    e = bld.zero("fork", depth)
    mid = bld.zero("join", depth)
    x = bld.zero("join", depth)
    for pe, px in parts[:4]:
        bld.dag.add_edge(e, pe)
        bld.dag.add_edge(px, mid)
    for pe, px in parts[4:]:
        bld.dag.add_edge(mid, pe)
        bld.dag.add_edge(px, x)
    return e, x


def _co3(bld, m, depth):
    if m == bld.b:
        nid = _base(bld, depth)
        return nid, nid
    parts = [_co3(bld, m // 2, depth + 1) for _ in range(8)]
    e = bld.zero("fork", depth)
    merge = bld.dag.add_node("madd", depth, 1, m * m)
    for pe, px in parts:
        bld.dag.add_edge(e, pe)
        bld.dag.add_edge(px, merge)
    return e, merge


def _tar(bld, m, depth, tr, tc):
    if m == bld.b:
        nid = _tar_base(bld, depth, tr, tc)
        return nid, nid
    half_tiles = (m // 2) // bld.b
    tiles = _mm_child_tiles(tr, tc, half_tiles)
    parts = [_tar(bld, m // 2, depth + 1, *tiles[i]) for i in range(8)]
    return bld.wrap(depth, parts)


def _sar(bld, m, depth):
    if m == bld.b:
        nid = _base(bld, depth)
        return nid, nid
    e = bld.zero("fork", depth)
    x = bld.zero("join", depth)
    h = m // 2
    for _q in range(4):
        we, wx = _sar(bld, h, depth + 1)       # half that claims the region
        le, lx = _sar(bld, h, depth + 1)       # concurrent half, into a temp
        acc = bld.dag.add_node("accum", depth + 1, 1, h * h)
        bld.dag.add_edge(e, we)
        bld.dag.add_edge(e, le)
        bld.dag.add_edge(wx, acc)
        bld.dag.add_edge(lx, acc)
        bld.dag.add_edge(acc, x)
    return e, x


def _star(bld, m, depth, k, tr, tc):
    if depth >= k:
        return _sar(bld, m, depth)
    if m == bld.b:
        nid = _tar_base(bld, depth, tr, tc)
        return nid, nid
    half_tiles = (m // 2) // bld.b
    tiles = _mm_child_tiles(tr, tc, half_tiles)
    parts = [_star(bld, m // 2, depth + 1, k, *tiles[i]) for i in range(8)]
    return _serialize_pairs(bld, depth, parts)


def _serialize_pairs(bld, depth, parts):
    """Join eight children, ordering each same-quadrant second half after
    its first half (the serialized-writes model of the tar-style levels)."""
    e = bld.zero("fork", depth)
    x = bld.zero("join", depth)
    for q in range(4):
        fe, fx = parts[q]
        se, sx = parts[q + 4]
        bld.dag.add_edge(e, fe)
        bld.dag.add_edge(fx, se)
        bld.dag.add_edge(sx, x)
    return e, x


# -- fast family --------------------------------------------------------------

def _strassen(bld, m, depth):
    if m == bld.b:
        nid = _base(bld, depth)
        return nid, nid
    h = m // 2
    e = bld.zero("fork", depth)
    x = bld.zero("join", depth)
    prod_exits = {}
    for r in range(1, 8):
        entry_deps = []
        for defs in (S_DEFS, T_DEFS):
            _q1_, op, _q2_ = defs[r]
            if op is not None:
                mat = bld.dag.add_node("mat", depth, 1, h * h)
                bld.dag.add_edge(e, mat)
                entry_deps.append(mat)
        pe, px = _strassen(bld, h, depth + 1)
        if entry_deps:
            for d in entry_deps:
                bld.dag.add_edge(d, pe)
        else:
            bld.dag.add_edge(e, pe)
        prod_exits[r] = px
    for _q, terms in C_FORMULAS.items():
        asm = bld.dag.add_node("assembly", depth, 1, (len(terms) - 1) * h * h)
        for r, _sign in terms:
            bld.dag.add_edge(prod_exits[r], asm)
        bld.dag.add_edge(asm, x)
    return e, x


def _sar_strassen(bld, m, depth):
    if m == bld.b:
        nid = _base(bld, depth)
        return nid, nid
    h = m // 2
    e = bld.zero("fork", depth)
    x = bld.zero("join", depth)
    for r in range(1, 8):
        mat_s = bld.dag.add_node("mat", depth + 1, 1, h * h)
        mat_t = bld.dag.add_node("mat", depth + 1, 1, h * h)
        bld.dag.add_edge(e, mat_s)
        bld.dag.add_edge(e, mat_t)
        pe, px = _sar_strassen(bld, h, depth + 1)
        bld.dag.add_edge(mat_s, pe)
        bld.dag.add_edge(mat_t, pe)
        uses = [(q, sign) for q, terms in C_FORMULAS.items()
                for rr, sign in terms if rr == r]
        for _q, _sign in uses:
            acc = bld.dag.add_node("accum", depth + 1, 1, h * h)
            bld.dag.add_edge(px, acc)
            bld.dag.add_edge(acc, x)
    return e, x


def _star1(bld, m, depth, k, tr, tc):
    if depth >= k:
        return _sar_strassen(bld, m, depth)
    if m == bld.b:
        nid = _tar_base(bld, depth, tr, tc)
        return nid, nid
    half_tiles = (m // 2) // bld.b
    tiles = _mm_child_tiles(tr, tc, half_tiles)
    parts = [_star1(bld, m // 2, depth + 1, k, *tiles[i]) for i in range(8)]
    return _serialize_pairs(bld, depth, parts)


def _star2(bld, m, depth, k):
    if depth >= k:
        return _sar_strassen(bld, m, depth)
    if m == bld.b:
        nid = _base(bld, depth)
        return nid, nid
    h = m // 2
    e = bld.zero("fork", depth)
    x = bld.zero("join", depth)
    prod_exits = {}
    for r in range(1, 8):
        entry_deps = []
        for defs in (S_DEFS, T_DEFS):
            _q1_, op, _q2_ = defs[r]
            if op is not None:
                mat = bld.dag.add_node("mat", depth, 1, h * h)
                bld.dag.add_edge(e, mat)
                entry_deps.append(mat)
        pe, px = _star2(bld, h, depth + 1, k)
        if entry_deps:
            for d in entry_deps:
                bld.dag.add_edge(d, pe)
        else:
            bld.dag.add_edge(e, pe)
        prod_exits[r] = px
    for _q, terms in C_FORMULAS.items():
        asm = bld.dag.add_node("assembly", depth, 1, (len(terms) - 1) * h * h)
        for r, _sign in terms:
            bld.dag.add_edge(prod_exits[r], asm)
        bld.dag.add_edge(asm, x)
    return e, x
