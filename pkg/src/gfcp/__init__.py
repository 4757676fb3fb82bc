"""Generalized fractional counting process: exact laws, samplers, dependence
structure, a CTRW limit and a ruin model driven by the alpha = 1 case."""

from .errors import (
    BudgetError,
    CapError,
    ConvergenceError,
    DomainError,
    FitError,
    GfcpError,
    GridError,
    NumericError,
    TruncationError,
    UnsupportedDist,
    ValidationError,
)
from .params import GfcpParams, SpecialCase, from_special_case, jump_distribution, params_from_json, validate
from .process import (
    compositions,
    correlation,
    covariance,
    factorial_moment,
    mean_var,
    ode_residual,
    pgf,
    pmf,
    pmf_vector,
    raw_moment,
    sample,
    sample_values,
)
from .specfun import MlAccuracy, incomplete_beta, ml_derivative, ml_three

__all__ = [
    "BudgetError",
    "CapError",
    "ConvergenceError",
    "DomainError",
    "FitError",
    "GfcpError",
    "GridError",
    "NumericError",
    "TruncationError",
    "UnsupportedDist",
    "ValidationError",
    "GfcpParams",
    "SpecialCase",
    "from_special_case",
    "jump_distribution",
    "params_from_json",
    "validate",
    "compositions",
    "correlation",
    "covariance",
    "factorial_moment",
    "mean_var",
    "ode_residual",
    "pgf",
    "pmf",
    "pmf_vector",
    "raw_moment",
    "sample",
    "sample_values",
    "MlAccuracy",
    "incomplete_beta",
    "ml_derivative",
    "ml_three",
]
