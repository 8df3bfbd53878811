"""Exception hierarchy shared by all infoplay modules."""


class InfoplayError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(InfoplayError, ValueError):
    """An input violates a documented precondition or invariant."""


class ConfigError(InfoplayError, ValueError):
    """An experiment config file is malformed or fails its schema."""


class ResourceCapError(InfoplayError, RuntimeError):
    """A declared resource cap (e.g. maximum enumerated states) was exceeded."""


class EstimationError(InfoplayError, RuntimeError):
    """Too little data to produce a meaningful statistical estimate."""


class NumericalContractError(InfoplayError, RuntimeError):
    """A numerical contract was violated beyond tolerance (e.g. a measured
    curve is non-monotone by more than the allowed Monte Carlo dip)."""
