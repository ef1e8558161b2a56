class BeamcombError(Exception):
    """Base class for all library errors."""


class DimensionError(BeamcombError, ValueError):
    pass


class InputError(BeamcombError, ValueError):
    pass


class ConfigError(BeamcombError, ValueError):
    pass


class NoRootError(BeamcombError, ArithmeticError):
    """The secular function has no root inside the bracketing interval."""


class ZeroSignalError(BeamcombError, ArithmeticError):
    pass


class DegenerateCombinerError(BeamcombError, ValueError):
    """Combination vectors are linearly dependent."""


class NotApplicableError(BeamcombError, ValueError):
    pass


class SearchSpaceError(BeamcombError, ValueError):
    """Exhaustive enumeration was requested for a space that is too large."""
