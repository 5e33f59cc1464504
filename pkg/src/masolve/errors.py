"""Exception hierarchy shared by every masolve module."""


class MasolveError(Exception):
    """Base class for all masolve errors."""


class DimensionError(MasolveError, ValueError):
    pass


class PoleError(MasolveError, ZeroDivisionError):
    pass


class ValidationError(MasolveError, ValueError):
    pass


class CapacityError(MasolveError):
    """Configuration space larger than the configured cap."""


class DegenerateParameterError(MasolveError, ValueError):
    pass


class ReducibilityError(MasolveError):
    """Generator null space is not one-dimensional."""

    def __init__(self, dimension):
        super().__init__(f"null space has dimension {dimension}, expected 1")
        self.dimension = dimension


class NonInvertibleError(MasolveError):
    pass


class TruncationError(MasolveError):
    """Truncated-representation value did not settle before the cap on N."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values or {}


class ConsistencyError(MasolveError):
    """An internal cross-check between two exact routes disagreed."""
