"""Exception hierarchy for the toolkit.

Exit-code mapping used by the CLI: contract violations exit 2, usage
errors exit 64, failed verification checks exit 1.
"""


class DyadicError(Exception):
    """Base class for all toolkit errors."""


class ContractError(DyadicError):
    """An operation was called with inputs violating its contract."""


class ResolutionError(DyadicError):
    """A lattice object cannot be represented at the working resolution."""


class ResourceError(DyadicError):
    """A hard size cap (enumeration or memory) would be exceeded."""


class CalibrationError(DyadicError):
    """The exceptional-set calibration failed to converge."""


class UnsupportedFamilyError(DyadicError):
    """The requested operation is only defined for orthonormal families."""
