"""Element algebras the multiplication kernels are generic over.

A semiring bundles the two binary operations, their identities, and an
optional additive inverse (present only for rings, where fast multiplication
is legal).  All element storage is 64 bits wide: the integer ring wraps
modulo 2**64 (numpy int64 semantics), the float ring and the (min,+)
tropical semiring use float64.  Every operation accepts scalars or numpy
arrays and is exact for the integer and tropical instances, so any
parallel evaluation order reproduces the serial result bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import NoAdditiveInverse

__all__ = ["Semiring", "INT_RING", "FLOAT_RING", "TROPICAL", "get_semiring", "SEMIRINGS"]


@njit(cache=True)
def _mm_int(a, b):
    n, kk = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        for k in range(kk):
            aik = a[i, k]
            for j in range(m):
                out[i, j] += aik * b[k, j]
    return out


@njit(cache=True)
def _mm_float(a, b):
    n, kk = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        for k in range(kk):
            aik = a[i, k]
            for j in range(m):
                out[i, j] += aik * b[k, j]
    return out


@njit(cache=True)
def _mm_minplus(a, b):
    n, kk = a.shape
    m = b.shape[1]
    out = np.full((n, m), np.inf)
    for i in range(n):
        for k in range(kk):
            aik = a[i, k]
            for j in range(m):
                v = aik + b[k, j]
                if v < out[i, j]:
                    out[i, j] = v
    return out


class Semiring:
    def __init__(self, sid, dtype, zero, one, add, mul, sub=None):
        self.id = sid
        self.dtype = np.dtype(dtype)
        self.zero = dtype(zero)
        self.one = dtype(one)
        self._add = add
        self._mul = mul
        self._sub = sub

    @property
    def has_sub(self):
        return self._sub is not None

    def add(self, a, b):
        return self._add(a, b)

    def mul(self, a, b):
        return self._mul(a, b)

    def sub(self, a, b):
        if self._sub is None:
            raise NoAdditiveInverse(f"semiring {self.id!r} has no additive inverse")
        return self._sub(a, b)

    def neg(self, a):
        """Map a to its additive inverse, i.e. (0 - 1) * a on a ring."""
        return self.sub(self.zero, a)

    def matmul(self, A, B):
        """Dense product of two square blocks under (add, mul)."""
        raise NotImplementedError

    def fold_add(self, C, D):
        """C[i,j] <- C[i,j] (+) D[i,j], in place."""
        raise NotImplementedError

    def full(self, shape):
        """Array filled with the additive identity."""
        return np.full(shape, self.zero, dtype=self.dtype)

    def __repr__(self):
        return f"Semiring({self.id!r})"


class _StandardRing(Semiring):
    def __init__(self, *args, kernel=None, **kw):
        super().__init__(*args, **kw)
        self._kernel = kernel

    def matmul(self, A, B):
        return self._kernel(A, B)

    def fold_add(self, C, D):
        np.add(C, D, out=C)


class _Tropical(Semiring):
    """(min, +) over float64; +inf is the additive identity."""

    def matmul(self, A, B):
        return _mm_minplus(A, B)

    def fold_add(self, C, D):
        np.minimum(C, D, out=C)


INT_RING = _StandardRing(
    "int", np.int64, 0, 1,
    add=np.add, mul=np.multiply, sub=np.subtract, kernel=_mm_int,
)

FLOAT_RING = _StandardRing(
    "float", np.float64, 0.0, 1.0,
    add=np.add, mul=np.multiply, sub=np.subtract, kernel=_mm_float,
)

TROPICAL = _Tropical(
    "tropical", np.float64, np.inf, 0.0,
    add=np.minimum, mul=np.add,
)

SEMIRINGS = {s.id: s for s in (INT_RING, FLOAT_RING, TROPICAL)}


def get_semiring(sid):
    try:
        return SEMIRINGS[sid]
    except KeyError:
        raise KeyError(f"unknown semiring {sid!r}; choose from {sorted(SEMIRINGS)}") from None
