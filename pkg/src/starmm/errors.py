"""Exception types shared across the package."""


class StarMMError(Exception):
    """Base class for all library errors."""


class DimMismatch(StarMMError):
    """Operands do not have compatible dimensions."""


class InvalidSplit(StarMMError):
    """A region with an odd extent cannot be split into quadrants."""


class NotBaseCase(StarMMError):
    """A base kernel was invoked on a region that is not base-sized."""


class AllocFailure(StarMMError):
    """The allocator could not satisfy a block request."""


class ContractViolation(StarMMError):
    """An API contract was broken by the caller (double release, bad reset...)."""


class AlignmentError(StarMMError):
    """A region is not aligned to the base-tile grid."""


class NoAdditiveInverse(StarMMError):
    """The algebra has no subtraction, required by fast multiplication."""


class TooLarge(StarMMError):
    """Requested problem size exceeds an oracle's supported scale."""


class InternalError(StarMMError):
    """Invariant broken inside the library itself."""
