"""Exception types shared across the package."""


class SetscanError(Exception):
    """Base class for all errors raised by setscan."""


class ConfigError(SetscanError, ValueError):
    """Invalid arguments or configuration (CLI exit code 2)."""


class InsufficientPointsError(ConfigError):
    pass


class DimensionMismatchError(ConfigError):
    pass


class NumericalError(SetscanError, ArithmeticError):
    """A computation could not be carried out on the given data (CLI exit code 3)."""


class DegenerateInputError(NumericalError):
    pass


class DuplicatePointsError(NumericalError):
    pass
