"""Task-parallel semiring matrix multiplication with pooled memory reuse.

Nine fork-join schedules over one shared base kernel, a per-worker LIFO
block pool, runtime concurrency metrics, and an analysis engine (cost
recurrences, an explicit task-DAG span oracle, and a trace-driven cache
simulator) for checking the schedules' space, span, and cache behavior.
"""

from .classic import (atomic_accumulate, co2, co3, sar_mm, star_mm,
                      switch_depth, tar_mm)
from .errors import (AllocFailure, AlignmentError, ContractViolation,
                     DimMismatch, InternalError, InvalidSplit,
                     NoAdditiveInverse, NotBaseCase, StarMMError, TooLarge)
from .kernels import base_kernel, madd, naive_mm
from .matrix import (Config, Matrix, MatrixRegion, TileExclusionTable,
                     load_matrix_text, matrices_equal, quadrant,
                     random_matrix, save_matrix_text)
from .pool import BlockHandle, Pool
from .registry import ALGORITHMS, CLASSICAL, STRASSEN_FAMILY, run_algorithm
from .runtime import Executor, current_worker_index
from .semiring import FLOAT_RING, INT_RING, SEMIRINGS, TROPICAL, Semiring, get_semiring
from .strassen import sar_strassen, star_strassen_1, star_strassen_2, strassen_parallel

__version__ = "0.1.0"
