"""Matrix storage, region views, run configuration, and fixture I/O.

A matrix owns one contiguous row-major buffer.  Recursion never copies:
it works on `MatrixRegion` descriptors into that buffer.  Regions that are
written concurrently are coordinated through the buffer's tile exclusion
table, which also carries the per-tile "virgin" flags used to give reused
(never zeroed) temporary blocks overwrite-on-first-touch semantics.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AlignmentError, ContractViolation, DimMismatch, InvalidSplit
from .semiring import Semiring, get_semiring

__all__ = [
    "Config", "Matrix", "MatrixRegion", "TileExclusionTable",
    "quadrant", "matrices_equal", "random_matrix",
    "save_matrix_text", "load_matrix_text",
]


def _is_pow2(x):
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class Config:
    """Run parameters: base dimension b, worker count p, cache geometry."""

    base_dim: int = 32
    workers: int = 1
    cache_size: int = 1 << 15   # M, in elements
    line_size: int = 8          # B, in elements
    epsilon: Fraction = Fraction(1, 3)

    def __post_init__(self):
        if not _is_pow2(self.base_dim):
            raise ContractViolation(f"base_dim must be a power of two, got {self.base_dim}")
        if self.workers < 1:
            raise ContractViolation(f"workers must be >= 1, got {self.workers}")
        if not (_is_pow2(self.cache_size) and _is_pow2(self.line_size)):
            raise ContractViolation("cache_size and line_size must be powers of two")
        if self.cache_size < self.line_size ** 2:
            raise ContractViolation(
                f"tall-cache violation: M={self.cache_size} < B^2={self.line_size ** 2}")
        eps = Fraction(self.epsilon)
        if not (0 < eps <= 1):
            raise ContractViolation(f"epsilon must lie in (0, 1], got {self.epsilon}")
        object.__setattr__(self, "epsilon", eps)

    def check_problem(self, n):
        """Entry-point precondition: n a power of two, n >= base_dim."""
        if not _is_pow2(n) or n < self.base_dim:
            raise InvalidSplit(
                f"n={n} must be a power of two >= base dimension {self.base_dim}")


class TileExclusionTable:
    """One exclusion slot per aligned b x b tile of a buffer.

    Each slot serializes concurrent accumulations into its tile and counts
    the entries routed through it.  The table also holds the tile's virgin
    flag: a virgin tile has undefined contents and must be overwritten by
    its first accumulation.
    """

    def __init__(self, rows, cols, tile):
        if rows % tile or cols % tile:
            raise AlignmentError(f"buffer {rows}x{cols} not tileable by b={tile}")
        self.tile = tile
        self.tiles_r = rows // tile
        self.tiles_c = cols // tile
        self._locks = [threading.Lock() for _ in range(self.tiles_r * self.tiles_c)]
        self.entry_counts = np.zeros((self.tiles_r, self.tiles_c), dtype=np.int64)
        self.virgin = np.zeros((self.tiles_r, self.tiles_c), dtype=bool)

    def slot(self, ti, tj):
        return self._locks[ti * self.tiles_c + tj]

    def mark_virgin(self):
        self.virgin[:] = True

    def total_entries(self):
        return int(self.entry_counts.sum())


class Matrix:
    """A square element buffer plus its algebra and bookkeeping handles."""

    def __init__(self, data, semiring, addr=None):
        data = np.ascontiguousarray(data, dtype=semiring.dtype)
        if data.ndim != 2:
            raise DimMismatch("matrices are two-dimensional")
        self.data = data
        self.semiring = semiring
        self.addr = addr          # element address of data[0, 0] in the trace space
        self.table = None         # TileExclusionTable, attached per run

    @classmethod
    def zeros(cls, n, semiring, addr=None):
        return cls(semiring.full((n, n)), semiring, addr=addr)

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def region(self):
        return MatrixRegion(self, 0, 0, self.rows, self.cols)

    def ensure_table(self, tile):
        if self.table is None or self.table.tile != tile:
            self.table = TileExclusionTable(self.rows, self.cols, tile)
        return self.table

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {self.semiring.id})"


@dataclass(frozen=True)
class MatrixRegion:
    """Rectangular view descriptor into a matrix buffer; never a copy."""

    buffer: Matrix
    row0: int
    col0: int
    rows: int
    cols: int

    def __post_init__(self):
        if (self.row0 + self.rows > self.buffer.rows
                or self.col0 + self.cols > self.buffer.cols):
            raise DimMismatch("region exceeds buffer extent")

    @property
    def row_stride(self):
        return self.buffer.cols

    def view(self):
        return self.buffer.data[self.row0:self.row0 + self.rows,
                                self.col0:self.col0 + self.cols]

    def quadrant(self, i, j):
        if self.rows != self.cols or self.rows % 2:
            raise InvalidSplit(f"cannot quarter a {self.rows}x{self.cols} region")
        h = self.rows // 2
        return MatrixRegion(self.buffer, self.row0 + i * h, self.col0 + j * h, h, h)

    def tile_range(self, tile):
        """Covered tile-grid slice; AlignmentError unless b-aligned."""
        if (self.row0 % tile or self.col0 % tile
                or self.rows % tile or self.cols % tile):
            raise AlignmentError(
                f"region @({self.row0},{self.col0}) {self.rows}x{self.cols} "
                f"not aligned to b={tile}")
        return (self.row0 // tile, self.col0 // tile,
                self.rows // tile, self.cols // tile)

    def addresses(self):
        """Element addresses of the region in row-major order (trace support)."""
        base = self.buffer.addr
        if base is None:
            raise ContractViolation("buffer has no trace address assigned")
        rows = base + (self.row0 + np.arange(self.rows)) * self.row_stride + self.col0
        return (rows[:, None] + np.arange(self.cols)[None, :]).ravel()


def quadrant(region, i, j):
    """The (i, j) quadrant view of a square, even-extent region."""
    return region.quadrant(i, j)


def matrices_equal(x, y, tol=1e-9):
    """Exact comparison for integer/tropical data, relative-tolerance for floats."""
    a = x.data if isinstance(x, Matrix) else np.asarray(x)
    b = y.data if isinstance(y, Matrix) else np.asarray(y)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    sid = x.semiring.id if isinstance(x, Matrix) else (
        "float" if a.dtype.kind == "f" else "int")
    if sid == "float":
        bound = tol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        return bool(np.all(np.abs(a - b) <= bound))
    return bool(np.array_equal(a, b))


def random_matrix(n, semiring, seed, inf_fraction=None):
    """Deterministic fixture matrix for a semiring.

    Integer entries are small to keep products readable; tropical matrices
    carry a sprinkling of +inf (the additive identity) unless disabled.
    """
    rng = np.random.default_rng(seed)
    if semiring.id == "int":
        data = rng.integers(0, 10, size=(n, n), dtype=np.int64)
    elif semiring.id == "float":
        data = rng.random((n, n))
    elif semiring.id == "tropical":
        data = rng.integers(0, 50, size=(n, n)).astype(np.float64)
        frac = 1 / 16 if inf_fraction is None else inf_fraction
        if frac:
            data[rng.random((n, n)) < frac] = np.inf
    else:
        raise KeyError(f"no fixture generator for semiring {semiring.id!r}")
    return Matrix(data, semiring)


def save_matrix_text(m, path):
    """Write the fixture text format: header 'rows cols semiring-id', then values."""
    with open(path, "w") as fh:
        fh.write(f"{m.rows} {m.cols} {m.semiring.id}\n")
        for row in m.data:
            fh.write(" ".join(_fmt(v, m.semiring) for v in row))
            fh.write("\n")


def _fmt(v, s):
    if s.id == "int":
        return str(int(v))
    if np.isinf(v):
        return "inf"
    if s.id == "tropical" and float(v) == int(v):
        return str(int(v))
    return repr(float(v))


def load_matrix_text(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise DimMismatch(f"bad fixture header in {path}")
        rows, cols, sid = int(header[0]), int(header[1]), header[2]
        s = get_semiring(sid)
        flat = fh.read().split()
    if len(flat) != rows * cols:
        raise DimMismatch(f"expected {rows * cols} values, found {len(flat)}")
    if s.id == "int":
        data = np.array([int(t) for t in flat], dtype=np.int64)
    else:
        data = np.array([np.inf if t == "inf" else float(t) for t in flat])
    return Matrix(data.reshape(rows, cols), s)
