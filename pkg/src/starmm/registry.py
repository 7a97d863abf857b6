"""Algorithm registry and run orchestration."""

from __future__ import annotations

from .classic import _classic_root
from .errors import ContractViolation, DimMismatch, NoAdditiveInverse
from .strassen import _strassen_root

__all__ = ["CLASSICAL", "STRASSEN_FAMILY", "ALGORITHMS", "run_algorithm"]

CLASSICAL = ("co2", "co3", "tar", "sar", "star")
STRASSEN_FAMILY = ("strassen", "sar-strassen", "star-strassen-1", "star-strassen-2")
ALGORITHMS = CLASSICAL + STRASSEN_FAMILY

# schedules whose shared-output writes go through tile exclusion slots
_LOCKED_OUTPUT = ("tar", "sar", "star", "sar-strassen", "star-strassen-1", "star-strassen-2")
# schedules that overwrite C through first-touch accumulation
_VIRGIN_OUTPUT = ("sar-strassen", "star-strassen-1", "star-strassen-2")
# schedules accepting an allocation mode
_MODAL = ("co3", "strassen")


def run_algorithm(ex, algo, C, A, B, s, mode="pooled"):
    """Validate a run and execute `algo` on the executor's worker pool.

    Classical schedules accumulate into C; the fast family overwrites it.
    """
    if algo not in ALGORITHMS:
        raise KeyError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
    if mode not in ("pooled", "raw"):
        raise ContractViolation(f"unknown mode {mode!r}")
    if mode == "raw" and algo not in _MODAL:
        raise ContractViolation(f"{algo} does not take an allocation mode")
    n = C.rows
    if not (A.rows == A.cols == B.rows == B.cols == C.cols == n):
        raise DimMismatch("A, B, C must be square with one common dimension")
    for m in (C, A, B):
        if m.semiring.id != s.id:
            raise DimMismatch(f"matrix algebra {m.semiring.id} != run algebra {s.id}")
    ex.cfg.check_problem(n)
    if algo in STRASSEN_FAMILY and not s.has_sub:
        raise NoAdditiveInverse(f"{algo} needs an additive inverse; {s.id} has none")

    ex.register_matrix(A)
    ex.register_matrix(B)
    ex.register_matrix(C)
    if algo in _LOCKED_OUTPUT:
        tbl = C.ensure_table(ex.cfg.base_dim)
        tbl.virgin[:] = False
        if algo in _VIRGIN_OUTPUT:
            tbl.mark_virgin()

    if algo in CLASSICAL:
        root = _classic_root(algo, ex, s, C, A, B, mode)
    else:
        root = _strassen_root(algo, ex, s, C, A, B, mode)
    ex.run(root)
