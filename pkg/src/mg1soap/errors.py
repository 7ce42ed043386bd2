"""Exception hierarchy shared by all mg1soap modules."""


class Mg1SoapError(Exception):
    """Base class for all mg1soap errors."""


class ConfigError(Mg1SoapError):
    """Malformed experiment config or CLI usage (exit code 2)."""


class InvalidParameterError(ConfigError):
    """A distribution or policy parameter is out of range.

    Carries the offending field name so config errors are actionable.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ClassMismatchError(ConfigError):
    """An analyzer was invoked on a distribution of the wrong tail class."""


class NumericError(Mg1SoapError):
    """A numeric procedure could not certify its result (exit code 3)."""


class PastSupportError(NumericError):
    """An age beyond the distribution's support was supplied."""


class DomainError(NumericError):
    """Arguments violate an operation's domain (e.g. b >= c)."""


class InconclusiveError(NumericError):
    """A tolerance band straddles a classification decision."""

    def __init__(self, message: str, margin: float):
        self.margin = margin
        super().__init__(f"{message} (margin {margin:.3e})")


class BracketFailureError(NumericError):
    """A root/minimum bracket could not be established."""


class UnboundedResidualError(NumericError):
    """Mean residual life is unbounded, so no rank bump age exists."""


class NoValidAgeError(NumericError):
    """No grid age satisfies the approximate-policy construction."""


class InsufficientDataError(NumericError):
    """Too few observations to fit the requested quantity."""


class UnstableConfigError(Mg1SoapError):
    """Offered load is at or above capacity (exit code 4)."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code contract."""
    if isinstance(exc, UnstableConfigError):
        return 4
    if isinstance(exc, ConfigError):
        return 2
    if isinstance(exc, Mg1SoapError):
        return 3
    raise exc
