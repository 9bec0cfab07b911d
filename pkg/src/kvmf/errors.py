"""Exception hierarchy shared by all solver modules."""


class KvmfError(Exception):
    """Base class for all solver-suite errors."""


class SingularParameterError(KvmfError, ValueError):
    """A closed-form expression was requested at a singular parameter point."""


class ConvergenceError(KvmfError):
    """An iterative solver exhausted its budget without meeting tolerance."""

    def __init__(self, message, last_state=None, residual=None, iterations=None):
        super().__init__(message)
        self.last_state = last_state
        self.residual = residual
        self.iterations = iterations


class BlowUpError(KvmfError):
    """Time evolution produced non-finite values."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DivisionGuardError(KvmfError):
    """A normalization denominator fell below the guard floor."""


class BracketError(KvmfError):
    """A root bracket could not be established or refined."""
