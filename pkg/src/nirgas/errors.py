"""Exception hierarchy shared by all nirgas modules."""


class NirgasError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(NirgasError, ValueError):
    pass


class UnsupportedConfigurationError(NirgasError):
    pass


class NumericalFailureError(NirgasError, ArithmeticError):
    """Raised when a solver loses trace/Hermiticity or hits a singular system."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class GridPointError(NirgasError):
    """A steady state on the probe/phase grid failed to converge."""

    def __init__(self, message, w_e=None, phase=None):
        super().__init__(message)
        self.w_e = w_e
        self.phase = phase


class ConfigError(NirgasError, ValueError):
    """Problem with a run configuration file (parse or validation)."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
