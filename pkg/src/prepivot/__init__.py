"""Prepivoted bootstrap p-values for asymptotically biased statistics."""

from prepivot.engine import (
    METHODS,
    TIE_RULES,
    BootstrapConfig,
    BootstrapProblem,
    PrepivotMap,
    PValueReport,
    apply_prepivot,
    bootstrap_p_values,
    double_bootstrap_p,
    prepivot_ci,
    standard_p_value,
    tail_variants,
)
from prepivot.errors import (
    BandwidthError,
    CapabilityError,
    DegeneracyError,
    DomainError,
    NumericError,
    ParameterError,
    PrepivotError,
    RankError,
)
from prepivot.numerics.rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "METHODS", "TIE_RULES", "BandwidthError", "BootstrapConfig", "BootstrapProblem", "CapabilityError",
    "DegeneracyError", "DomainError", "NumericError", "PValueReport", "ParameterError", "PrepivotError",
    "PrepivotMap", "RankError", "RngStream", "apply_prepivot", "bootstrap_p_values", "double_bootstrap_p",
    "prepivot_ci", "standard_p_value", "tail_variants", "__version__",
]
