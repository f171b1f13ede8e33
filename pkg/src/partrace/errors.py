"""Exception types raised by partrace."""

from __future__ import annotations


class PartraceError(ValueError):
    """Base class for every error raised on bad input."""


class ShapeError(PartraceError):
    """Matrix shapes are incompatible with the requested operation."""


class NotHermitianError(PartraceError):
    pass


class ConvergenceError(PartraceError, ArithmeticError):
    """The Jacobi eigensolver exhausted its sweep budget."""


class InvalidStateError(PartraceError):
    """A density operator or ket violates its validity invariants."""


class BasisError(PartraceError):
    """A supplied basis is incomplete or not orthonormal."""


class GridError(PartraceError):
    pass
