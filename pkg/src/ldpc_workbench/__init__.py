"""LDPC ensembles, iterative decoders and density evolution."""

from . import channels, decoders, degree_dist, density_evolution, factor_graph, harness, ira
from ._backend import NAME as backend
from .errors import (ConfigurationError, InconsistentInputError, InvalidDistributionError,
                     InvalidParameterError, WorkbenchError)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "InconsistentInputError", "InvalidDistributionError",
    "InvalidParameterError", "WorkbenchError", "backend", "channels", "decoders",
    "degree_dist", "density_evolution", "factor_graph", "harness", "ira",
]
