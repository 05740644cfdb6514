"""Exception hierarchy shared by every module of the package."""


class DickeQBError(Exception):
    """Base class for all errors raised by :mod:`dicke_qb`."""


class InvalidParameterError(DickeQBError, ValueError):
    """A parameter lies outside its admissible range."""


class BasisMismatchError(DickeQBError, ValueError):
    """Operands act on incompatible bases or dimensions."""


class TruncationError(DickeQBError):
    """The truncated cavity space cannot represent the state faithfully."""


class StaleStateError(DickeQBError):
    """A state vector is no longer normalized."""


class InvalidStateError(DickeQBError):
    """A density matrix violates positivity, hermiticity or unit trace."""


class NumericalError(DickeQBError):
    """A linear-algebra kernel failed or did not converge."""


class IntegrationError(NumericalError):
    """Time propagation failed to meet its error tolerance."""


class AccuracyWarning(UserWarning):
    """A result was computed but may be affected by truncation."""
