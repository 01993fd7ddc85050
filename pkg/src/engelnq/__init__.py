"""Graded nilpotent quotients of Lie rings and 5-Engel relation experiments."""

__version__ = "0.1.0"

from .exactalg import GF, QQ, ZZ, SNFResult, SparseRow, echelonize, prime_support, smith_normal_form
from .freelie import TruncationSpec, derived_ideal_upper_bound, hall_basis, witt_dimension
from .nqcore import EngelSpec, GradedLieAlgebra, Presentation, build, ideal_class, left_normed, max_a_entries, multiply

__all__ = [
    "GF",
    "QQ",
    "ZZ",
    "SNFResult",
    "SparseRow",
    "echelonize",
    "prime_support",
    "smith_normal_form",
    "TruncationSpec",
    "derived_ideal_upper_bound",
    "hall_basis",
    "witt_dimension",
    "EngelSpec",
    "GradedLieAlgebra",
    "Presentation",
    "build",
    "ideal_class",
    "left_normed",
    "max_a_entries",
    "multiply",
]
