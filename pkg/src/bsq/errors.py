"""Exception types shared across the package.

ConfigError marks bad user input (CLI exit code 2); DomainError and its
subclasses mark numerical or domain failures inside a computation (exit 3).
Plain ValueError is reserved for contract violations (dimension mismatches,
chart mismatches, malformed arguments).
"""


class ConfigError(Exception):
    """Invalid configuration or malformed user input."""


class DomainError(Exception):
    """A computation left its domain of validity."""


class IncompletenessError(DomainError):
    """A shift flow would exit the action box of its chart."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class SupportError(DomainError):
    """Grid section support too close to the action-box boundary."""


class UnsupportedObservableError(DomainError):
    """Observable outside the class an operation can realize exactly."""


class MatchingError(DomainError):
    """No integer branch satisfies the representative-matching condition."""


class OverlapError(DomainError):
    """A chart chain step left the overlap it was supposed to stay in."""


class BranchTrackingError(DomainError):
    """Continuation lost the branch (successive samples too far apart)."""


class QuadratureError(DomainError):
    """Adaptive quadrature failed to converge."""
