"""Exception hierarchy.

Every error raised by the package derives from :class:`StretchBoundError`.
The CLI maps the three families below onto exit codes 2, 3 and 4.
"""


class StretchBoundError(Exception):
    """Base class for all package errors."""


class ParseError(StretchBoundError, ValueError):
    """Malformed channel or chain specification."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DomainError(StretchBoundError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DimensionError(DomainError):
    pass


class ShapeError(DomainError):
    pass


class PhysicalityError(DomainError):
    """Covariance matrix violates the uncertainty principle."""


class ChannelDomainError(DomainError):
    pass


class SimulationDomainError(DomainError):
    """The channel admits no finite-resource teleportation simulation here."""


class SingularGibbsError(DomainError):
    """Gibbs matrix diverges: the state is pure (or nearly so) in some mode."""


class NumericalConsistencyError(StretchBoundError, ArithmeticError):
    """An internal numerical self-check failed."""


class DecompositionError(NumericalConsistencyError):
    pass


class ConstructionError(NumericalConsistencyError):
    pass


class OptimizationError(NumericalConsistencyError):
    pass


class OracleConsistencyError(NumericalConsistencyError):
    pass


class SupportError(NumericalConsistencyError):
    """Second oracle state is rank-deficient on the support of the first."""
