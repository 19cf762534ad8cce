"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`ShiftMatchError`, so callers (and the CLI) can separate
computational failures from programming errors.
"""


class ShiftMatchError(Exception):
    """Base class for all package errors."""


class UnsupportedLoss(ShiftMatchError, ValueError):
    pass


class UnknownTemplate(ShiftMatchError, ValueError):
    pass


class InvalidScale(ShiftMatchError, ValueError):
    pass


class EmptyDataset(ShiftMatchError, ValueError):
    pass


class DegenerateBounds(ShiftMatchError, ValueError):
    pass


class InvalidBounds(ShiftMatchError, ValueError):
    pass


class NotRegularGrid(ShiftMatchError, ValueError):
    pass


class InadmissiblePair(ShiftMatchError, ValueError):
    pass


class InfiniteMoment(InadmissiblePair):
    """The loss/noise pair needs a moment the noise does not have."""


class ZeroCurvature(ShiftMatchError, ArithmeticError):
    """E[L''(Z)] is (numerically) not positive."""


class NonSmoothTemplate(ShiftMatchError, ValueError):
    pass


class NoDiscontinuity(ShiftMatchError, ValueError):
    pass


class WindowExplosion(ShiftMatchError, ArithmeticError):
    """The limit process minimum escaped every simulation window."""


class EmptySample(ShiftMatchError, ValueError):
    pass


class NonPositiveInput(ShiftMatchError, ValueError):
    pass


class QuadratureError(ShiftMatchError, ArithmeticError):
    pass


class ConfigError(ShiftMatchError, ValueError):
    """A name or value in a configuration string could not be resolved."""
