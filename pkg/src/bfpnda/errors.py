"""Exception types raised by the solver stack."""


class BfpError(Exception):
    """Base class for all package errors."""


class IntegrationError(BfpError):
    """Kernel moment quadrature did not reach the requested accuracy."""


class SingularSystemError(BfpError):
    """A linear system could not be factored or solved."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SolverError(BfpError):
    """A linear solve finished with an unacceptable residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateFluxError(BfpError):
    """A closure ratio needs a scalar flux that vanished."""

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class ConfigError(BfpError):
    """Malformed or invalid run configuration."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key
