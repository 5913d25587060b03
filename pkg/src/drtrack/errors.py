"""Exception types raised across the toolkit."""


class TrackingError(Exception):
    """Base class for all errors raised by drtrack."""


class ShapeMismatch(TrackingError, ValueError):
    pass


class ImaginaryResidue(TrackingError, ArithmeticError):
    """Inverse transform of a supposedly real-signal spectrum is not real."""


class TargetTooSmall(TrackingError, ValueError):
    pass


class BetaOutOfRange(TrackingError, ValueError):
    pass


class DegenerateRegion(TrackingError, ValueError):
    pass


class DegenerateBox(TrackingError, ValueError):
    pass


class NotFinite(TrackingError, FloatingPointError):
    pass


class EmptyInput(TrackingError, ValueError):
    pass


class TargetLeavesFrame(TrackingError, ValueError):
    pass


class ConfigError(TrackingError, ValueError):
    pass
