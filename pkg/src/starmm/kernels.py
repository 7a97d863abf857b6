"""Serial element kernels: the brute-force oracle, base kernel, and merge.

`naive_mm` is the correctness oracle for every task-parallel schedule in
the package: one dense product evaluated directly over the whole operands,
with no recursion, no temporaries and no scheduling involved.  On the
integer and tropical algebras it is bit-exact, so parallel schedules must
reproduce it exactly.
"""

from __future__ import annotations

from .errors import DimMismatch, NotBaseCase
from .matrix import Matrix, MatrixRegion

__all__ = ["naive_mm", "base_kernel", "madd"]


def _as_region(x):
    return x.region() if isinstance(x, Matrix) else x


def _check_square_pair(a, b):
    if not (a.rows == a.cols == b.rows == b.cols):
        raise DimMismatch(
            f"operands must be square and equal: {a.rows}x{a.cols} vs {b.rows}x{b.cols}")


def naive_mm(A, B, s):
    """C[i][j] = fold-add over k of A[i][k] (x) B[k][j]; the serial oracle."""
    A, B = _as_region(A), _as_region(B)
    _check_square_pair(A, B)
    return Matrix(s.matmul(A.view(), B.view()), s)


def base_kernel(C, A, B, s, cfg):
    """C <- C (+) A (x) B on exactly base-sized (b x b) regions."""
    C, A, B = _as_region(C), _as_region(A), _as_region(B)
    _check_square_pair(A, B)
    if C.rows != C.cols or C.rows != A.rows:
        raise DimMismatch("output region does not match operands")
    if C.rows != cfg.base_dim:
        raise NotBaseCase(f"region is {C.rows}x{C.cols}, base dimension is {cfg.base_dim}")
    cv = C.view()
    s.fold_add(cv, s.matmul(A.view(), B.view()))


def madd(C, D, s):
    """Merge D into C elementwise: C[i][j] <- C[i][j] (+) D[i][j]."""
    C, D = _as_region(C), _as_region(D)
    if C.rows != D.rows or C.cols != D.cols:
        raise DimMismatch(f"madd shapes differ: {C.rows}x{C.cols} vs {D.rows}x{D.cols}")
    s.fold_add(C.view(), D.view())
