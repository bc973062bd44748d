"""Full counting statistics and efficiency fluctuations of a four-level
quantum heat engine with noise-induced coherence."""

from .engine import PRESETS, DerivedQuantities, EngineParams, derived_quantities, validate_params
from .errors import QhefcsError, SolverError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "DerivedQuantities",
    "EngineParams",
    "derived_quantities",
    "validate_params",
    "QhefcsError",
    "SolverError",
    "ValidationError",
]
