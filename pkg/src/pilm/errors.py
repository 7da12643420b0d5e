"""Exception types shared across the package."""


class PilmError(Exception):
    """Base class for numerical and data errors raised by this package."""


class UnderdeterminedSystemError(PilmError):
    """The normal matrix of a solve is singular or indefinite."""


class InsufficientDataError(PilmError):
    """Too few effective data for the requested statistic (N - M + P <= 0)."""


class StationFileError(PilmError):
    """A station table could not be parsed or produced no usable stations."""
