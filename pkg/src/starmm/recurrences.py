"""Numeric evaluation of the schedules' cost recurrences.

Everything is computed in exact integer arithmetic over recursion levels
(the stop-condition fraction is handled with `fractions.Fraction`), so the
explicit-DAG oracle can be compared for equality, not approximately.

Unit conventions (mirrored exactly by the DAG builder in `dag`):

* span: one unit per base kernel, per merge level, per operand
  materialization, per quadrant assembly, and per accumulate entry;
  a tar-style base case is one fused unit (product plus its tile merge).
* work: b^3 multiply-adds per base kernel (plus b^2 merge elements for a
  tar-style base), and the touched element count for every explicit data
  op (merge m^2; materialization m^2, bare copies included in the lazy
  fast scheme; assembly (terms-1) * m^2).
* space: temporary elements only (inputs and output excluded), evaluated
  from each schedule's own recurrence; the lazy schemes are capacity
  bounds per the busy-leaves argument, not measured footprints.
* serial cache: line transfers with a footprint-over-B stop value; a
  recursion stops when its footprint fits in epsilon * M (or at the base),
  fresh-allocating schemes never stop early.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import ceil

from .classic import switch_depth
from .errors import ContractViolation, InvalidSplit
from .matrix import Config
from .registry import ALGORITHMS

__all__ = ["CostReport", "eval_recurrence", "parallel_cache_bound", "sar_copy_depth"]


@dataclass(frozen=True)
class CostReport:
    algo: str
    n: int
    work: int
    span: int
    space: int
    q1: int
    qp: int
    switch_depth: int | None = None

    def __post_init__(self):
        if self.span > self.work:
            raise ContractViolation("span exceeds work")
        if self.qp < self.q1:
            raise ContractViolation("parallel cache below serial cache")
        if min(self.work, self.span, self.space, self.q1, self.qp) < 0:
            raise ContractViolation("negative cost")

    def to_json(self):
        return json.dumps(asdict(self))


def parallel_cache_bound(q1, p, span, M, B):
    """q1 + p * span * M / B, the parallel cache-miss bound with constant 1."""
    if min(q1, p, span, M, B) < 0 or B <= 0:
        raise ContractViolation("arguments must be nonnegative (B positive)")
    return q1 + p * span * M // B


def sar_copy_depth(p):
    """Smallest k with 4*(8^0 + ... + 8^k) >= p: the depth below which the
    lazy scheme can hand every concurrent half its own copy."""
    k, total = 0, 4
    while total < p:
        k += 1
        total += 4 * 8 ** k
    return k


def _levels(n, b):
    L = 0
    while n > b:
        n //= 2
        L += 1
    return L


def eval_recurrence(algo, n, cfg):
    """Unroll the cost recurrences for `algo` at size n under `cfg`."""
    if algo not in ALGORITHMS:
        raise KeyError(f"unknown algorithm {algo!r}")
    b, p, M, B, eps = (cfg.base_dim, cfg.workers, cfg.cache_size,
                       cfg.line_size, cfg.epsilon)
    cfg.check_problem(n)
    if n % b:
        raise InvalidSplit(f"n={n} is not a multiple of b={b}")

    k = switch_depth(p) if algo.startswith("star") else (
        sar_copy_depth(p) if algo == "sar" else None)

    span = _span(algo, n, b, 0, k)
    work = _work(algo, n, b, 0, k)
    space = _space(algo, n, b, p, k)
    q1 = _q1(algo, n, b, 0, k, B, eps * M)
    qp = parallel_cache_bound(q1, p, span, M, B)
    return CostReport(algo=algo, n=n, work=work, span=span, space=space,
                      q1=q1, qp=qp, switch_depth=k)


# -- span ---------------------------------------------------------------

def _span(algo, m, b, depth, k):
    if m == b:
        return 1
    half = _span(algo, m // 2, b, depth + 1, k)
    if algo in ("co2", "tar"):
        return 2 * half
    if algo in ("co3", "sar"):
        return half + 1
    if algo == "star":
        return 2 * half if depth < k else half + 1
    if algo in ("strassen", "sar-strassen", "star-strassen-2"):
        return half + 2
    if algo == "star-strassen-1":
        return 2 * half if depth < k else half + 2
    raise KeyError(algo)


# -- work ---------------------------------------------------------------

def _work(algo, m, b, depth, k):
    if m == b:
        # tar-style leaves fuse the product with a b^2 tile merge; the
        # hybrids reach such leaves only above their switch depth
        fused = algo == "tar" or (
            algo in ("star", "star-strassen-1") and k is not None and depth < k)
        return b ** 3 + (b ** 2 if fused else 0)
    h = m // 2
    if algo == "co2":
        return 8 * _work(algo, h, b, depth + 1, k)
    if algo == "tar":
        return 8 * _work(algo, h, b, depth + 1, k)
    if algo in ("co3", "sar"):
        # one full-size merge per level (co3), or its worst-case equivalent:
        # four quadrant accumulates (sar)
        return 8 * _work(algo, h, b, depth + 1, k) + m * m
    if algo == "star":
        sub = _work(algo, h, b, depth + 1, k)
        return 8 * sub if depth < k else 8 * sub + m * m
    if algo == "strassen":
        # 10 materializations + assemblies of 3+1+1+3 binary ops
        return 7 * _work(algo, h, b, depth + 1, k) + 18 * h * h
    if algo == "sar-strassen":
        # 14 materializations (bare copies included) + 12 accumulates
        return 7 * _work(algo, h, b, depth + 1, k) + 26 * h * h
    if algo == "star-strassen-1":
        if depth < k:
            return 8 * _work(algo, h, b, depth + 1, k)
        return _work("sar-strassen", m, b, depth, k)
    if algo == "star-strassen-2":
        if depth < k:
            return 7 * _work(algo, h, b, depth + 1, k) + 18 * h * h
        return _work("sar-strassen", m, b, depth, k)
    raise KeyError(algo)


# -- space (temporary elements) -------------------------------------------

def _geom_quarter(v, b, per_level):
    """sum of per_level * (v/2^i)^2 for v/2^i from v/2 down to b."""
    total, m = 0, v // 2
    while m >= b:
        total += per_level * m * m
        m //= 2
    return total


def _space(algo, n, b, p, k):
    if algo == "co2":
        return 0
    if algo == "tar":
        return p * b * b
    if algo == "co3":
        def s(m):
            return 0 if m == b else 8 * s(m // 2) + m * m
        return s(n)
    if algo == "sar":
        def s(m, d):
            if m == b:
                return 0
            if d >= k:
                return p * _geom_quarter(m, b, 1)
            return 8 * s(m // 2, d + 1) + 4 * (m // 2) ** 2
        return s(n, 0)
    if algo == "star":
        switch = max(n >> k, b)
        return p * _geom_quarter(switch, b, 1)
    if algo == "strassen":
        def s(m):
            return 0 if m == b else 7 * s(m // 2) + 17 * (m // 2) ** 2
        return s(n)
    if algo == "sar-strassen":
        return p * _geom_quarter(n, b, 3)
    if algo == "star-strassen-1":
        switch = max(n >> k, b)
        return p * _geom_quarter(switch, b, 3)
    if algo == "star-strassen-2":
        def s(m, d):
            if m == b:
                return 0
            if d >= k:
                return p * _geom_quarter(m, b, 3)
            return 7 * s(m // 2, d + 1) + 17 * (m // 2) ** 2
        return s(n, 0)
    raise KeyError(algo)


# -- serial cache (line transfers) ------------------------------------------

def _lines(x, B):
    return ceil(Fraction(x) / B)


def _q1(algo, m, b, depth, k, B, epsM):
    if algo == "co2":
        foot = 3 * m * m
        if foot <= epsM or m == b:
            return _lines(foot, B)
        return 8 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
    if algo == "tar":
        foot = 3 * m * m + b * b
        if foot <= epsM or m == b:
            return _lines(foot, B)
        return 8 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
    if algo == "co3":
        if m == b:
            return _lines(3 * b * b, B)
        return (8 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
                + _q1_madd(m, b, B, epsM))
    if algo == "sar":
        foot = Fraction(10, 3) * m * m
        if foot <= epsM or m == b:
            return _lines(foot, B)
        return (8 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
                + _lines(2 * m * m, B))
    if algo == "star":
        if depth >= k:
            return _q1("sar", m, b, depth, k, B, epsM)
        foot = 3 * m * m
        if foot <= epsM or m == b:
            return _lines(foot, B)
        return 8 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
    if algo == "strassen":
        if m == b:
            return _lines(3 * b * b, B)
        return (7 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
                + _lines(17 * (m // 2) ** 2, B))
    if algo == "sar-strassen":
        foot = 7 * m * m
        if foot <= epsM or m == b:
            return _lines(foot, B)
        return (7 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
                + _lines(3 * m * m, B))
    if algo == "star-strassen-1":
        if depth >= k:
            return _q1("sar-strassen", m, b, depth, k, B, epsM)
        foot = 3 * m * m
        if foot <= epsM or m == b:
            return _lines(foot, B)
        return 8 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
    if algo == "star-strassen-2":
        if depth >= k:
            return _q1("sar-strassen", m, b, depth, k, B, epsM)
        if m == b:
            return _lines(3 * b * b, B)
        return (7 * _q1(algo, m // 2, b, depth + 1, k, B, epsM)
                + _lines(17 * (m // 2) ** 2, B))
    raise KeyError(algo)


def _q1_madd(m, b, B, epsM):
    foot = 2 * m * m
    if foot <= epsM or m == b:
        return _lines(foot, B)
    return 4 * _q1_madd(m // 2, b, B, epsM)
