"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InfeasibleError(ValueError):
    """Expectation values do not describe a probability distribution.

    ``sign_pair`` is the offending outcome pair ``(a, b)`` when known, and
    ``cell`` the offending data-matrix position.
    """

    def __init__(self, message, sign_pair=None, cell=None):
        super().__init__(message)
        self.sign_pair = sign_pair
        self.cell = cell


class SingularAngleError(DomainError):
    """Relative angle with sin(theta) == 0, where cot/csc are undefined."""


class DegenerateMeasurementError(DomainError):
    """Measurement with zero sharpness cannot be inverted."""


class UndefinedCellError(ValueError):
    """A data matrix contains cells without any supporting samples."""
