"""Exact computations with graded Lie algebras and thin Lie algebras."""

from .scalar import Field, make_field
from .freelie import parse, expand, witt_dimension, lyndon_basis
from .graded import GradedAlgebra
from .engine import Presentation, compute_quotient, evaluate, quotient_by

__version__ = "0.1.0"

__all__ = [
    "Field",
    "make_field",
    "parse",
    "expand",
    "witt_dimension",
    "lyndon_basis",
    "GradedAlgebra",
    "Presentation",
    "compute_quotient",
    "evaluate",
    "quotient_by",
]
