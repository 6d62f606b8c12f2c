"""Exception types shared across the package.

All inherit from ValueError so callers that do not care about the fine
distinction can catch one base class.
"""


class CiqError(ValueError):
    """Base class for all package errors."""


class DomainError(CiqError):
    """An argument is outside its mathematical domain (e.g. tau not in (0,1))."""


class DimensionError(CiqError):
    """Array shapes are inconsistent or too small for the requested fit."""


class SingularityError(CiqError):
    """A design matrix is rank deficient or numerically singular."""


class SchemaError(CiqError):
    """An input file violates its declared schema."""


class ConfigError(CiqError):
    """A run configuration is missing or inconsistent."""
