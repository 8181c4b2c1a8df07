"""Exception hierarchy shared across the package."""


class TsdivError(Exception):
    """Base class for every error raised by tsdiv."""


class DimensionError(TsdivError, ValueError):
    pass


class ParameterError(TsdivError, ValueError):
    pass


class InputError(TsdivError, ValueError):
    pass


class InvariantError(TsdivError, ValueError):
    """A data structure violates its documented invariants."""


class SizeError(TsdivError, ValueError):
    """Requested work exceeds a hard guard (e.g. brute-force enumeration)."""


class NotDifferentiableError(TsdivError, ValueError):
    pass


class DataError(TsdivError, ValueError):
    """Malformed input file."""


class NumericalError(TsdivError, ArithmeticError):
    pass
