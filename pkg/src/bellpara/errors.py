"""Exception and warning types shared across the package."""


class ConstraintViolation(ValueError):
    """Exponents or coefficients fail a structural constraint."""


class DomainError(ValueError):
    """A point lies outside the set on which a quantity is defined."""


class BoundaryError(ValueError):
    """A second-order quantity was requested too close to a critical surface."""


class ProbabilityError(ValueError):
    """Split probabilities of a filtration are invalid."""


class InfeasibleMoments(ValueError):
    """No step function of the requested depth matches the given moments."""


class SimulationError(RuntimeError):
    """Simulated inputs fail a sanity check (e.g. are not martingales)."""


class QuadratureError(RuntimeError):
    """A quadrature rule did not converge."""


class EpsilonError(ValueError):
    """The mollification radius is too large for the fields it is applied to."""


class SearchFailure(RuntimeError):
    """The coefficient search could not even certify its starting point."""


class QuadratureWarning(RuntimeWarning):
    pass


class TruncationWarning(RuntimeWarning):
    pass
