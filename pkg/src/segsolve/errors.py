"""Exception hierarchy. The CLI maps each class to a process exit code."""


class SegsolveError(Exception):
    """Base class for all package errors."""


class ValidationError(SegsolveError, ValueError):
    """Malformed arguments: wrong shapes, counts, or parameter ranges."""


class ProblemDefinitionError(ValidationError):
    """The problem data itself is inadmissible (e.g. overlapping boundary supports)."""


class ContractViolation(SegsolveError):
    """An operation was called outside its precondition (e.g. stencil at a boundary node)."""


class NumericalError(SegsolveError, ArithmeticError):
    """A non-finite value appeared during iteration."""


class InternalConsistencyError(SegsolveError):
    """An invariant that the theory guarantees was breached; indicates a bug."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class SizeError(ValidationError):
    """Instance exceeds the hard cap of an exhaustive method."""
