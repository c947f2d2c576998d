"""Exception hierarchy shared by the library and the CLI."""


class ChronoHurstError(Exception):
    """Base class for all package errors."""


class InputError(ChronoHurstError, ValueError):
    """Bad input data or parameters (CLI exit status 2)."""


class NumericError(ChronoHurstError, ArithmeticError):
    """A computation could not produce a finite answer (CLI exit status 3)."""
