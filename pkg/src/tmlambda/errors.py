"""Exception types shared across the package.

``ConfigError`` signals bad user input (CLI exit code 1); everything deriving
from ``ComputationError`` is a failure of the numerics on valid input (exit 2).
"""


class ConfigError(ValueError):
    """Invalid configuration or input file; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ComputationError(RuntimeError):
    pass


class DegenerateField(ComputationError):
    """Zero splitting, so the effective-field direction is undefined."""


class AntiparallelFields(ComputationError):
    """Ground and excited effective fields are antiparallel; R diverges."""


class NoInteriorMaximum(ComputationError):
    """The branching ratio is monotone over the tilt interval."""


class InconsistentData(ComputationError):
    """Two routes to the same fitted quantity disagree beyond tolerance."""


class WindowTooNarrow(ComputationError):
    """Probe window cannot hold the full hole/anti-hole family."""
