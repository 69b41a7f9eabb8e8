"""Exception hierarchy shared by every module of the toolkit."""


class GeotocError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(GeotocError, ValueError):
    """Argument is malformed, non-finite, or of inconsistent dimension."""


class RangeError(InvalidInputError):
    """Argument lies outside the supported domain."""


class DegenerateGateError(InvalidInputError):
    """Requested gate or segment is degenerate (e.g. a zero rotation)."""


class InvalidModulationError(InvalidInputError):
    """Parametric modulation index gives a non-positive effective coupling."""


class SingularPathError(GeotocError, ArithmeticError):
    """Quadrature integrand diverges on the supplied path."""


class UndefinedPhaseError(GeotocError, ArithmeticError):
    """Phase of a vanishing overlap was requested."""


class ModelError(GeotocError):
    """A Hamiltonian sample violates a structural invariant."""


class ConvergenceError(GeotocError, RuntimeError):
    """Integrator accuracy check failed; a smaller step is required."""


class ConfigError(GeotocError, ValueError):
    """Run configuration is invalid.

    Parameters
    ----------
    message : str
        Human readable description.
    key : str, optional
        Dotted ``section.key`` path of the offending entry.
    """

    def __init__(self, message, key=None):
        self.key = key
        if key:
            message = f"{key}: {message}"
        super().__init__(message)
