"""Biorthogonal systems and quasi-bases generated by constructing operators.

Everything lives in the span of the first N Hermite functions: operators are
N x N matrices, and every identity is checked numerically with a residual
and a tolerance recorded in a :class:`CheckReport`.
"""

from .errors import (
    BasisMismatchError,
    ConfigurationError,
    ContractError,
    ExprError,
    NumericError,
    QuasiBasisError,
    SingularityError,
)
from .hamiltonian import LadderTriple, standard_triple, transform_triple, validate_alpha_condition
from .models import ModelSpec, load_model
from .operators import StateVector, TruncatedOperator
from .opexpr import lower, parse, to_source
from .polar import PolarPair, polar_decompose, positive_constructing_pair
from .reports import CheckReport
from .riesz import AlphaSequence, BiorthogonalSystem, ConstructingPair, build_system

__version__ = "0.1.0"

__all__ = [
    "AlphaSequence", "BasisMismatchError", "BiorthogonalSystem", "CheckReport",
    "ConfigurationError", "ConstructingPair", "ContractError", "ExprError", "LadderTriple",
    "ModelSpec", "NumericError", "PolarPair", "QuasiBasisError", "SingularityError",
    "StateVector", "TruncatedOperator", "build_system", "load_model", "lower", "parse",
    "polar_decompose", "positive_constructing_pair", "standard_triple", "to_source",
    "transform_triple", "validate_alpha_condition",
]
