"""
BusyQ - Error Types
=====================
Every failure raised by the engines derives from BusyQError so the CLI and
the HTTP API can translate it into an exit code or a status code.
"""


class BusyQError(Exception):
    """Base class for all busyq errors."""


class ParameterDomainError(BusyQError, ValueError):
    """A parameter lies outside its admissible domain."""


class DistSpecError(ParameterDomainError):
    """A distribution specification string could not be parsed."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class QuadratureAccuracyError(BusyQError):
    """The subdivision budget ran out before the tolerance was met."""

    def __init__(self, message: str, best_estimate: float, est_error: float):
        self.best_estimate = best_estimate
        self.est_error = est_error
        super().__init__(
            f"{message} (best estimate {best_estimate!r}, est. error {est_error:.3g})"
        )


class DivergenceError(BusyQError):
    """A requested moment is infinite for the given service law."""

    def __init__(self, order: int, message: str = ""):
        self.order = order
        detail = f": {message}" if message else ""
        super().__init__(f"E[B^{order}] diverges{detail}")


class DegenerateDistributionError(BusyQError):
    """Shape statistics are undefined for a (numerically) constant variable."""


class UnknownTableError(BusyQError, KeyError):
    """No table is registered under the requested id."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown table"
