"""Optimal recovery of multiplier operators from Fourier data with random errors."""

from .applications import DerivativeProblem, HeatProblem, problem_from_dict
from .errors import (BracketFailure, ConstraintViolation, DomainError, GridTooNarrow,
                     HermitianViolation, InsufficientTrials, InvalidWeights, NumericalError,
                     OptirecError, QuadratureFailure)
from .optimal_core import (OptimalFilter, RecoveryProblem, SolverConfig, f_general,
                           optimal_error, solve_cutoff)
from .weights import CustomPair, DerivativePair, HeatPair, WeightPair, pair_from_dict

__version__ = "0.1.0"

__all__ = [
    "BracketFailure", "ConstraintViolation", "CustomPair", "DerivativePair", "DerivativeProblem",
    "DomainError", "GridTooNarrow", "HeatPair", "HeatProblem", "HermitianViolation",
    "InsufficientTrials", "InvalidWeights", "NumericalError", "OptimalFilter", "OptirecError",
    "QuadratureFailure", "RecoveryProblem", "SolverConfig", "WeightPair", "f_general",
    "optimal_error", "pair_from_dict", "problem_from_dict", "solve_cutoff",
]
