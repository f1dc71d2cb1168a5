"""Exception types. Each carries a short machine-readable ``category``."""


class AQCError(Exception):
    category = "error"


class ConfigInvalid(AQCError, ValueError):
    category = "config_invalid"


class TruncationInsufficient(AQCError):
    category = "truncation_insufficient"


class UnderflowRisk(AQCError, FloatingPointError):
    category = "underflow_risk"


class TabulatedOutOfRange(AQCError, ValueError):
    category = "tabulated_out_of_range"


class EigensolverFailure(AQCError):
    category = "eigensolver_failure"


class ConfigMismatch(AQCError, ValueError):
    category = "config_mismatch"


class DegenerateRatio(AQCError, ZeroDivisionError):
    category = "degenerate_ratio"


class UndefinedQ(AQCError, ZeroDivisionError):
    category = "undefined_q"


class GridTooSmall(AQCError, ValueError):
    category = "grid_too_small"


class IOFailure(AQCError, OSError):
    category = "io_failure"


class LocalizationWarning(UserWarning):
    """A forward prepared state is not localized left of the ramp."""
