"""Exception hierarchy. Everything derives from ValueError so callers can catch broadly."""


class GeoinfError(ValueError):
    """Base class for library errors."""


class DomainError(GeoinfError):
    """An argument lies outside the mathematical domain of the operation."""


class PreconditionError(GeoinfError):
    """An input violates a stated precondition (e.g. a set that must be increasing is not)."""


class CapacityError(GeoinfError):
    """A table would exceed the supported size."""


class ConfigError(GeoinfError):
    """Unknown theorem id, family name or malformed instance specification."""
