"""Reduced and exotic norms on finite étale groupoids and quotient towers."""

from .algebra import AlgebraElement, convolve, involution, restrict_to_isotropy
from .errors import CheckFailure, ConvergenceError, GroupoidError, InputError
from .groupoid import FiniteGroupoid, Grading, isotropy_group, orbits, validate_groupoid
from .groups import FiniteGroup, FreeGroup, MatrixGroup, cyclic_group
from .norms import exotic_norm_finite, reduced_norm, tmred_certificate

__version__ = "0.1.0"

__all__ = ["AlgebraElement", "convolve", "involution", "restrict_to_isotropy", "CheckFailure",
           "ConvergenceError", "GroupoidError", "InputError", "FiniteGroupoid", "Grading",
           "isotropy_group", "orbits", "validate_groupoid", "FiniteGroup", "FreeGroup",
           "MatrixGroup", "cyclic_group", "exotic_norm_finite", "reduced_norm",
           "tmred_certificate"]
