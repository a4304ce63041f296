"""Exception types shared across the package."""


class QpackError(Exception):
    """Base class for all qpack errors."""


class ValidationError(QpackError):
    """Domain input violates a documented precondition or invariant."""


class FormatError(QpackError):
    """A serialized file is malformed or carries an unknown format tag."""


class LayoutError(QpackError):
    """A two-qubit term does not lie on a coupler edge of the device map."""


class QubitCapError(QpackError):
    """Requested statevector exceeds the configured qubit cap."""


class BoundViolationError(QpackError):
    """An actually constructed instance exceeds a closed-form resource bound."""


class SolverTimeout(QpackError):
    """Time budget exceeded; carries the best solution seen so far."""

    def __init__(self, message, best_size=None, best_witness=None):
        super().__init__(message)
        self.best_size = best_size
        self.best_witness = best_witness
