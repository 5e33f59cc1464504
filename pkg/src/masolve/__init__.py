"""Exact and stochastic stationary states of integrable exclusion processes."""

from .errors import (CapacityError, ConsistencyError, DegenerateParameterError, DimensionError,
                     MasolveError, NonInvertibleError, PoleError, ReducibilityError,
                     TruncationError, ValidationError)
from .models import ModelSpec, assemble_markov, build_local_operators
from .steady import StationaryDistribution, observables, stationary

__version__ = "0.1.0"

__all__ = [
    "ModelSpec", "assemble_markov", "build_local_operators", "StationaryDistribution",
    "stationary", "observables", "MasolveError", "DimensionError", "PoleError", "ValidationError",
    "CapacityError", "DegenerateParameterError", "ReducibilityError", "NonInvertibleError",
    "TruncationError", "ConsistencyError", "__version__",
]
