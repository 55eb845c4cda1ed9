"""Exception types raised by netcpd."""


class NetCPDError(Exception):
    """Base class for all netcpd errors."""


class InvalidArgumentError(NetCPDError, ValueError):
    """An argument violates an operation's precondition."""


class DomainError(InvalidArgumentError):
    """A scalar argument lies outside the function's domain."""


class DegenerateModelError(InvalidArgumentError):
    """The model parameters make a statistic undefined (e.g. zero expected degree)."""


class ConvergenceError(NetCPDError, ArithmeticError):
    """An iterative numerical routine hit its iteration cap.

    ``last_iterate`` holds the best estimate available when iteration stopped.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class CalibrationError(NetCPDError):
    """The requested type-I target cannot be met on the threshold grid."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FormatError(NetCPDError, ValueError):
    """A data file is malformed. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ConfigError(NetCPDError, ValueError):
    """A run configuration is invalid. ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)
        self.key = key
