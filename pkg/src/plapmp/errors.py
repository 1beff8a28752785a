"""Exception types shared across the package."""


class PlapError(Exception):
    """Base class for all package errors."""


class ConfigError(PlapError, ValueError):
    """Invalid domain, exponents, weights or run configuration."""


class ConvergenceError(PlapError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    ``history`` holds whatever diagnostics the solver collected, and
    ``residual`` the last residual it saw (``nan`` if none).
    """

    def __init__(self, message, residual=float("nan"), history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history or [])


class CertificationError(PlapError, RuntimeError):
    """A constructed counterexample failed its residual certificate."""


class InconsistencyError(PlapError, RuntimeError):
    """A cross-check that theory guarantees came out false (signals a bug)."""
