"""k-deformed Prabhakar fractional calculus toolkit."""

from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    EvaluationError,
    HorizonError,
    KPrabhakarError,
    TruncationError,
)
from .grids import Grid1D, SampledFunction
from .params import HilferParams, PrabhakarParams, SeriesControl
from .special import k_gamma, k_pochhammer, ml_k, ml_k_grid, prabhakar_kernel

__all__ = [
    "ConfigError",
    "DivergenceError",
    "DomainError",
    "EvaluationError",
    "Grid1D",
    "HilferParams",
    "HorizonError",
    "KPrabhakarError",
    "PrabhakarParams",
    "SampledFunction",
    "SeriesControl",
    "TruncationError",
    "k_gamma",
    "k_pochhammer",
    "ml_k",
    "ml_k_grid",
    "prabhakar_kernel",
]

__version__ = "0.1.0"
