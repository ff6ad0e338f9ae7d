"""Exception types shared across the package."""


class RteSourceError(Exception):
    """Base class for package errors."""


class DomainError(RteSourceError, ValueError):
    """A geometric or parameter precondition was violated."""


class IterationLimitError(RteSourceError, RuntimeError):
    """Fixed-point iteration did not reach tolerance within the budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SolverError(RteSourceError, RuntimeError):
    """A linear solve failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FormatError(RteSourceError, IOError):
    """A data file has a bad magic string, header, or payload length."""
