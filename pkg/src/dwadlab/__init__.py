"""Density-weighted average derivative estimation with Edgeworth diagnostics."""

from .errors import (
    AssumptionViolation,
    ConfigurationError,
    DataError,
    DegenerateVarianceError,
    DwadError,
    NumericalError,
)
from .estimator import (
    AL,
    SB,
    DwadFit,
    IntervalEstimate,
    Sample,
    confidence_interval,
    estimate,
    t_statistic,
    variance_al,
    variance_sb,
)
from .kernel import KernelSpec, MultiIndex, make_gaussian_kernel, make_higher_order_kernel, verify_moments

__version__ = "0.1.0"

__all__ = [
    "AL", "SB", "AssumptionViolation", "ConfigurationError", "DataError",
    "DegenerateVarianceError", "DwadError", "DwadFit", "IntervalEstimate", "KernelSpec",
    "MultiIndex", "NumericalError", "Sample", "confidence_interval", "estimate",
    "make_gaussian_kernel", "make_higher_order_kernel", "t_statistic", "variance_al",
    "variance_sb", "verify_moments",
]
