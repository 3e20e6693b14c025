"""Finite-difference computation of segregated stationary states of m competing densities."""

__version__ = "0.1.0"

from .core import MultiPhaseState, audit, energy, hat, scheme_residual
from .dynamics import Dynamics, builtin
from .errors import (
    ContractViolation,
    InternalConsistencyError,
    NumericalError,
    ProblemDefinitionError,
    SegsolveError,
    SizeError,
    ValidationError,
)
from .grid import GridFunction, UniformGrid
from .problem import NodeTable, ProblemSpec
from .solver import SolveConfig, SolveReport, initialize, solve

__all__ = [
    "ContractViolation", "Dynamics", "GridFunction", "InternalConsistencyError", "MultiPhaseState",
    "NodeTable", "NumericalError", "ProblemDefinitionError", "ProblemSpec", "SegsolveError", "SizeError",
    "SolveConfig", "SolveReport", "UniformGrid", "ValidationError", "audit", "builtin", "energy", "hat",
    "initialize", "scheme_residual", "solve",
]
