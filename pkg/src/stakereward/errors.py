"""Exception types shared across the package."""


class StakeRewardError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(StakeRewardError, ValueError):
    """Vectors or matrices have incompatible lengths."""


class DomainError(StakeRewardError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstraintViolationError(StakeRewardError, ValueError):
    """A structural constraint (e.g. zero row sums) does not hold."""


class InsufficientDataError(StakeRewardError, ValueError):
    """Too few observations to compute a statistic."""


class MissingDataError(StakeRewardError, KeyError):
    """A required entry is absent."""


class NotApplicableError(StakeRewardError, ValueError):
    """The operation is undefined for this input (e.g. too few stakeholders)."""


class UnsupportedFamilyError(NotApplicableError):
    """Variant family has no registered implementation."""


class ValidationError(StakeRewardError, ValueError):
    """Input document failed validation."""

    def __init__(self, message, path=()):
        self.path = tuple(path)
        where = "/".join(str(p) for p in self.path)
        super().__init__(f"{where}: {message}" if where else message)
