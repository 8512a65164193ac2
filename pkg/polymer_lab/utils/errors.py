"""
Error types for the polymer lab.

Every error carries an exit code for the command line and a ``details``
dict that is echoed verbatim into the machine-readable error JSON.
"""


class PolymerLabError(Exception):
    """Base class. ``exit_code`` is what the CLI returns."""

    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details,
        }


class ConfigError(PolymerLabError, ValueError):
    exit_code = 2


class ConvergenceError(PolymerLabError, RuntimeError):
    """Raised when a node/mesh doubling loop runs out of budget."""

    exit_code = 3


class AcceptanceError(PolymerLabError):
    exit_code = 4


class DegenerateDistributionError(PolymerLabError, ValueError):
    exit_code = 2


class ShapeMismatchError(PolymerLabError, ValueError):
    pass


class NonFiniteWeightError(PolymerLabError, ValueError):
    pass


class ContourError(PolymerLabError, ValueError):
    pass


class PoleError(PolymerLabError, ValueError):
    pass


class GridExhaustedError(PolymerLabError, RuntimeError):
    exit_code = 3


class TruncationError(PolymerLabError, RuntimeError):
    exit_code = 3


class ResourceLimitError(PolymerLabError, RuntimeError):
    pass
