"""Exception hierarchy shared by every module."""


class SchatteError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(SchatteError, ValueError):
    """A model or experiment was configured with invalid parameters."""


class DomainError(SchatteError, ValueError):
    """An argument lies outside the domain of an operation."""


class NonMixingConfiguration(SchatteError, ValueError):
    """The wrapped walk has no spectral gap (some |phi(2 pi k x)| equals 1)."""


class PSDRepairError(SchatteError, ValueError):
    """A covariance matrix needed a larger PSD repair than tolerated."""
