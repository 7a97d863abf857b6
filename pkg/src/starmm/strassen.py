"""Fast (seven-product) matrix multiplication and its reduced-space variants.

Requires a ring: the quadrant assembly subtracts, so the algebra must carry
an additive inverse.  All entry points overwrite C with A (x) B.

* ``strassen_parallel`` — straightforward parallelization: one step
  materializes every non-bare operand combination and all seven product
  targets up front (at most 17 half-size temporaries), runs the products
  concurrently, then assembles the four output quadrants.
* ``sar_strassen``      — each product task owns exactly three pooled
  scratch blocks (left operand, right operand, product), materializes the
  operands on the fly, and merges the finished product into the output
  quadrants it feeds, sign-aware, through the tile exclusion slots.
* ``star_strassen_1``   — classical eight-way recursion above the switch
  depth, sar_strassen below it (more work, shorter critical path).
* ``star_strassen_2``   — straightforward seven-way levels above the
  switch, sar_strassen below (optimal work, more space).
"""

from __future__ import annotations

from .classic import _instrumented, _mm_children, _tar_leaf, switch_depth
from .ops import accumulate_region, assemble, leaf_accumulate, mat_into, product_into

__all__ = ["strassen_parallel", "sar_strassen", "star_strassen_1", "star_strassen_2",
           "S_DEFS", "T_DEFS", "C_FORMULAS", "C_USES"]

# operand combinations per product index: (quadrant, op, quadrant|None)
S_DEFS = {
    1: ((0, 0), "add", (1, 1)),
    2: ((1, 0), "add", (1, 1)),
    3: ((0, 0), None, None),
    4: ((1, 1), None, None),
    5: ((0, 0), "add", (0, 1)),
    6: ((1, 0), "sub", (0, 0)),
    7: ((0, 1), "sub", (1, 1)),
}
T_DEFS = {
    1: ((0, 0), "add", (1, 1)),
    2: ((0, 0), None, None),
    3: ((0, 1), "sub", (1, 1)),
    4: ((1, 0), "sub", (0, 0)),
    5: ((1, 1), None, None),
    6: ((0, 0), "add", (0, 1)),
    7: ((1, 0), "add", (1, 1)),
}
# output quadrant -> signed product list
C_FORMULAS = {
    (0, 0): [(1, +1), (4, +1), (5, -1), (7, +1)],
    (0, 1): [(3, +1), (5, +1)],
    (1, 0): [(2, +1), (4, +1)],
    (1, 1): [(1, +1), (3, +1), (2, -1), (6, +1)],
}
# product index -> the quadrants it feeds
C_USES = {r: [] for r in range(1, 8)}
for _q, _terms in C_FORMULAS.items():
    for _r, _sign in _terms:
        C_USES[_r].append((_q, _sign))


# -- straightforward parallelization ----------------------------------------

def _materialize_operands(ex, s, depth, src, defs, mode, tokens):
    m2 = src.rows // 2
    out = {}
    for r in range(1, 8):
        q1, op, q2 = defs[r]
        if op is None:
            out[r] = src.quadrant(*q1)
        else:
            token, m = ex.acquire_temp(m2, s, depth, mode=mode, virgin=False)
            tokens.append(token)
            mat_into(ex, s, m.region(), src.quadrant(*q1), src.quadrant(*q2), op)
            out[r] = m.region()
    return out


def _straightforward_step(ex, s, depth, C, A, B, mode, make_child, virgin_products):
    """One level of the straightforward scheme: mats, 7 products, assembly."""
    m2 = C.rows // 2
    tokens = []
    S = _materialize_operands(ex, s, depth, A, S_DEFS, mode, tokens)
    T = _materialize_operands(ex, s, depth, B, T_DEFS, mode, tokens)
    P = {}
    for r in range(1, 8):
        token, m = ex.acquire_temp(m2, s, depth, mode=mode, virgin=virgin_products)
        tokens.append(token)
        P[r] = m.region()
    ex.parallel([make_child(depth + 1, P[r], S[r], T[r]) for r in range(1, 8)])
    for q, terms in C_FORMULAS.items():
        assemble(ex, s, C.quadrant(*q), [(P[r], sign) for r, sign in terms])
    for token in reversed(tokens):
        ex.release_temp(token)


def _strassen_child(ex, s, depth, C, A, B, mode):
    if C.rows == ex.cfg.base_dim:
        return _instrumented(ex, depth, True,
                             lambda: product_into(ex, s, C, A, B))
    return _instrumented(ex, depth, False,
                         lambda: _strassen_node(ex, s, depth, C, A, B, mode))


def _strassen_node(ex, s, depth, C, A, B, mode):
    _straightforward_step(
        ex, s, depth, C, A, B, mode,
        make_child=lambda d, p, a, b: _strassen_child(ex, s, d, p, a, b, mode),
        virgin_products=False)


# -- sar variant -------------------------------------------------------------

def _sar_strassen_descend(ex, s, depth, C, A, B):
    if C.rows == ex.cfg.base_dim:
        leaf_accumulate(ex, s, C, A, B, locked=True)
    else:
        _sar_strassen_node(ex, s, depth, C, A, B)


def _sar_strassen_node(ex, s, depth, C, A, B):
    m2 = C.rows // 2
    b = ex.cfg.base_dim

    def product_task(r):
        def body():
            t_s, ms = ex.acquire_temp(m2, s, depth + 1, virgin=False)
            t_t, mt = ex.acquire_temp(m2, s, depth + 1, virgin=False)
            t_p, mp = ex.acquire_temp(m2, s, depth + 1, virgin=True)
            try:
                q1, op, q2 = S_DEFS[r]
                mat_into(ex, s, ms.region(), A.quadrant(*q1),
                         A.quadrant(*q2) if op else None, op or "copy")
                q1, op, q2 = T_DEFS[r]
                mat_into(ex, s, mt.region(), B.quadrant(*q1),
                         B.quadrant(*q2) if op else None, op or "copy")
                _sar_strassen_descend(ex, s, depth + 1, mp.region(), ms.region(), mt.region())
                for q, sign in C_USES[r]:
                    accumulate_region(ex, s, C.quadrant(*q), mp.region(), negate=sign < 0)
            finally:
                ex.release_temp(t_p)
                ex.release_temp(t_t)
                ex.release_temp(t_s)
        return _instrumented(ex, depth + 1, m2 == b, body)

    ex.parallel([product_task(r) for r in range(1, 8)])


# -- hybrids -----------------------------------------------------------------

def _star1_child(ex, s, depth, k, C, A, B):
    if C.rows == ex.cfg.base_dim:
        return _instrumented(ex, depth, True, lambda: _tar_leaf(ex, s, depth, C, A, B))
    return _instrumented(ex, depth, False,
                         lambda: _star1_node(ex, s, depth, k, C, A, B))


def _star1_node(ex, s, depth, k, C, A, B):
    if depth >= k:
        _sar_strassen_node(ex, s, depth, C, A, B)
        return
    ch = _mm_children(C, A, B)
    ex.parallel([_star1_child(ex, s, depth + 1, k, *c) for c in ch])


def _star2_child(ex, s, depth, k, C, A, B):
    if C.rows == ex.cfg.base_dim:
        return _instrumented(ex, depth, True, lambda: product_into(ex, s, C, A, B))
    return _instrumented(ex, depth, False,
                         lambda: _star2_node(ex, s, depth, k, C, A, B))


def _star2_node(ex, s, depth, k, C, A, B):
    if depth >= k:
        _sar_strassen_node(ex, s, depth, C, A, B)
        return
    _straightforward_step(
        ex, s, depth, C, A, B, "pooled",
        make_child=lambda d, p, a, b: _star2_child(ex, s, d, k, p, a, b),
        virgin_products=True)


# -- roots and public entry points -------------------------------------------

def _strassen_root(algo, ex, s, C, A, B, mode):
    Cr, Ar, Br = C.region(), A.region(), B.region()
    leaf = C.rows == ex.cfg.base_dim
    k = switch_depth(ex.p)
    if algo == "strassen":
        body = (lambda: product_into(ex, s, Cr, Ar, Br)) if leaf \
            else (lambda: _strassen_node(ex, s, 0, Cr, Ar, Br, mode))
    elif algo == "sar-strassen":
        body = (lambda: leaf_accumulate(ex, s, Cr, Ar, Br, locked=True)) if leaf \
            else (lambda: _sar_strassen_node(ex, s, 0, Cr, Ar, Br))
    elif algo == "star-strassen-1":
        if leaf:
            body = (lambda: _tar_leaf(ex, s, 0, Cr, Ar, Br)) if k > 0 \
                else (lambda: leaf_accumulate(ex, s, Cr, Ar, Br, locked=True))
        else:
            body = lambda: _star1_node(ex, s, 0, k, Cr, Ar, Br)
    elif algo == "star-strassen-2":
        if leaf:
            body = (lambda: product_into(ex, s, Cr, Ar, Br)) if k > 0 \
                else (lambda: leaf_accumulate(ex, s, Cr, Ar, Br, locked=True))
        else:
            body = lambda: _star2_node(ex, s, 0, k, Cr, Ar, Br)
    else:
        raise KeyError(f"unknown fast schedule {algo!r}")
    return _instrumented(ex, 0, leaf, body)


def _run_public(algo, C, A, B, s, cfg, mode="pooled"):
    from .registry import run_algorithm
    from .runtime import Executor
    with Executor(cfg) as ex:
        run_algorithm(ex, algo, C, A, B, s, mode=mode)


def strassen_parallel(C, A, B, s, cfg, mode="pooled"):
    """C <- A (x) B by the straightforward seven-product parallelization."""
    _run_public("strassen", C, A, B, s, cfg, mode=mode)


def sar_strassen(C, A, B, s, cfg):
    """Seven-product recursion with three pooled scratch blocks per product."""
    _run_public("sar-strassen", C, A, B, s, cfg)


def star_strassen_1(C, A, B, s, cfg):
    """Classical eight-way levels above the switch depth, then sar_strassen."""
    _run_public("star-strassen-1", C, A, B, s, cfg)


def star_strassen_2(C, A, B, s, cfg):
    """Straightforward seven-way levels above the switch, then sar_strassen."""
    _run_public("star-strassen-2", C, A, B, s, cfg)
