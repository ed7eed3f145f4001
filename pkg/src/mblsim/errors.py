"""Exception hierarchy shared across the package."""


class MBLError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(MBLError, ValueError):
    exit_code = 2


class CapacityError(MBLError):
    """Requested system is too large for the exact engine."""

    exit_code = 3


class ConvergenceError(MBLError, ArithmeticError):
    exit_code = 4


class ZigZagInstabilityError(MBLError, ValueError):
    """A transverse mode has a non-positive squared frequency."""

    exit_code = 4


class ResonanceError(MBLError, ValueError):
    """Beatnote detuning sits too close to a motional mode."""

    exit_code = 2
