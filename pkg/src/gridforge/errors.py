"""Exception hierarchy shared by every gridforge module.

Two families exist so the command line can map failures onto exit codes:
``ValidationError`` subclasses describe bad inputs (exit code 2) and
``NumericalGuardError`` subclasses describe a computation that tripped a
numerical safety check (exit code 3).
"""

from __future__ import annotations


class GridforgeError(Exception):
    """Base class for all library errors."""


class ValidationError(GridforgeError, ValueError):
    """Input rejected before or during validation."""


class NumericalGuardError(GridforgeError, ArithmeticError):
    """A numerical guard (convergence, truncation, capacity) failed."""


class InvalidArgument(ValidationError):
    pass


class DegenerateLattice(ValidationError):
    pass


class NotACode(ValidationError):
    """Symplectic Gram matrix is not integral."""


class DimensionError(ValidationError):
    """det(A) is not a perfect square."""


class UnsupportedDimension(ValidationError):
    pass


class InvalidSplit(ValidationError):
    pass


class ConstructionError(ValidationError):
    pass


class UnsupportedGaussian(ValidationError):
    pass


class CapacityError(NumericalGuardError):
    pass


class FlowStalled(NumericalGuardError):
    """Gradient flow did not converge; ``last`` holds the final iterate."""

    def __init__(self, message: str, last=None):
        super().__init__(message)
        self.last = last


class ClassificationError(NumericalGuardError):
    pass


class DecoderInconsistency(NumericalGuardError):
    pass


class TruncationError(NumericalGuardError):
    pass


class TruncationWarning(UserWarning):
    """Population leaked into the top Fock levels of a truncated mode."""
