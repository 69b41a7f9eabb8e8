"""Time-optimal geometric gates for superconducting transmons."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateGateError,
    GeotocError,
    InvalidInputError,
    InvalidModulationError,
    ModelError,
    RangeError,
    SingularPathError,
    UndefinedPhaseError,
)
from .model import KHZ, MHZ
