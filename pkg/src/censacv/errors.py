"""Exception types shared across the package."""


class CensacvError(ValueError):
    """Base class for validation errors raised by censacv."""


class LagOutOfRange(CensacvError):
    pass


class ZeroOverlap(CensacvError):
    """No co-observed pair exists at the requested lag."""


class ZeroVariance(CensacvError):
    pass


class ZeroDenominator(CensacvError):
    pass


class NonStationary(CensacvError):
    """Model parameters violate the contraction / stationarity condition."""


class ConfigError(CensacvError):
    pass


class Unavailable(CensacvError):
    """A closed form needed by the caller is not implemented for this model."""


class NonSummableWarning(RuntimeWarning):
    """Last truncation shell of an infinite sum is not negligible."""
