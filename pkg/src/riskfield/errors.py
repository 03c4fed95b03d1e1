"""Exception types shared across the library."""


class RiskfieldError(Exception):
    """Base class for all library-specific errors."""


class NotSymmetricError(RiskfieldError):
    """Matrix handed to the SPD factorizer is not symmetric."""


class NotPositiveDefiniteError(RiskfieldError):
    """Factorization failed even after the jitter ladder was exhausted."""


class DimensionMismatchError(RiskfieldError):
    """Operands have incompatible shapes."""


class InvalidParametersError(RiskfieldError):
    """Parameters violate a documented validity condition."""


class OutOfBoxError(RiskfieldError):
    """A point lies outside the factor box."""


class TooFewPointsError(RiskfieldError):
    """Not enough observations for the requested model."""


class DegenerateDataError(RiskfieldError):
    """Observations carry no usable signal (constant responses, singular design)."""


class NumericalBreakdownError(RiskfieldError):
    """A quantity left its mathematically valid range by more than roundoff."""


class AllRestartsFailedError(RiskfieldError):
    """Every calibration restart ended in a degenerate or failed state."""


class MonotonicityViolationError(RiskfieldError):
    """A tabulated function violates its required monotonicity."""


class UnsupportedDimensionError(RiskfieldError):
    """Requested dimension exceeds the shipped direction-number table."""


class ConfigError(RiskfieldError):
    """Experiment configuration is missing or invalid."""
