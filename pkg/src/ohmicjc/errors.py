"""Exception types shared across the package."""


class OhmicJCError(Exception):
    """Base class for package errors."""


class DomainError(OhmicJCError, ValueError):
    """Input outside the mathematical domain (negative cutoff, bad exponent, and so on)."""


class UnsupportedExponentError(OhmicJCError, ValueError):
    """Closed-form decay rate requested for an Ohmicity exponent without one.

    Callers should fall back to decay_rate_quadrature.
    """


class QuadratureError(OhmicJCError, RuntimeError):
    """Quadrature failed to converge to the requested tolerance.

    Attributes:
        achieved: best error estimate reached before giving up.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NoTransitionError(OhmicJCError, RuntimeError):
    """Critical-coupling search found no Markovian -> non-Markovian transition.

    Attributes:
        scan: list of (coupling, measure) pairs from the coarse pre-scan.
    """

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan or []


class RatioUndefinedError(OhmicJCError, ZeroDivisionError):
    """Speed-limit ratio is 0/0: no evolution happened over the horizon."""


class ConfigError(OhmicJCError, ValueError):
    """Invalid run configuration (CLI or config file)."""
