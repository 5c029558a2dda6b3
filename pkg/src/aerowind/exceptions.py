"""Exception hierarchy shared by all modules."""


class AeroWindError(Exception):
    """Base class for every error raised by this package."""


class GimbalLock(AeroWindError, ValueError):
    """Pitch angle too close to +/-90 deg for the Euler-rate transform."""


class DegenerateAirspeed(AeroWindError, ValueError):
    """Airspeed too small for flow angles or rate normalisation."""


class ThrottleOutOfRange(AeroWindError, ValueError):
    pass


class TrimNotFound(AeroWindError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ClockMisaligned(AeroWindError, ValueError):
    pass


class SingularInnovation(AeroWindError, ArithmeticError):
    pass


class NoAvailableRows(AeroWindError, ValueError):
    pass


class NonMonotonicTime(AeroWindError, ValueError):
    pass


class MissingFlowAngles(AeroWindError, ValueError):
    pass


class EmptyWindow(AeroWindError, ValueError):
    pass


class ConfigError(AeroWindError, ValueError):
    """Base for configuration problems; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class MissingPhysicalConstant(ConfigError):
    pass


class UsageError(AeroWindError):
    pass
