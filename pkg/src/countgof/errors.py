"""Exception types shared across the package."""


class CountGofError(Exception):
    """Base class for all package errors."""


class DomainError(CountGofError):
    """An argument lies outside the mathematical domain of an operation."""


class FeasibilityError(CountGofError):
    """A parameter vector violates a model constraint.

    The message names the violated constraint so callers can report it.
    """

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        msg = constraint if not detail else f"{constraint}: {detail}"
        super().__init__(msg)


class DimensionError(CountGofError):
    """Array shapes or parameter dimensions do not match the model spec."""


class ConfigError(CountGofError):
    """A config file or CLI flag combination is invalid."""


class CsvError(CountGofError):
    """CSV ingestion failure; message carries the offending line number."""


class BootstrapError(CountGofError):
    """Bootstrap run failed (e.g. excessive refit drops)."""
