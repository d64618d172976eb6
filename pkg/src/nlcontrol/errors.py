"""Exception types raised by the solver library and the CLI."""


class NLControlError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(NLControlError, ValueError):
    pass


class InvalidKernelError(InvalidArgumentError):
    pass


class EmptyControlRegionError(InvalidArgumentError):
    pass


class SingularOperatorError(NLControlError, ArithmeticError):
    pass


class NonConvergenceError(NLControlError, RuntimeError):
    """Iterative solve stopped at ``max_iter`` above tolerance.

    The last iterate and its relative residual are kept so callers can
    still inspect or use them.
    """

    def __init__(self, message, iterate=None, residual=None, history=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.history = history if history is not None else []


class ConfigError(NLControlError, ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class FormatError(NLControlError, ValueError):
    pass
