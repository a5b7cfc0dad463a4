"""Exception hierarchy shared by every module."""


class SoftCoverError(Exception):
    """Base class for library errors."""


class DimensionError(SoftCoverError, ValueError):
    """Alphabet sizes of the arguments do not line up."""


class DomainError(SoftCoverError, ValueError):
    """A scalar parameter lies outside its admissible interval."""


class ValidationError(SoftCoverError, ValueError):
    """A probability object violates its invariants."""


class DegenerateChannelError(SoftCoverError, ValueError):
    """Every channel row equals the output distribution; the exponents are infinite."""


class SizeError(SoftCoverError, ValueError):
    """An exhaustive computation would exceed its size guard."""


class ConstraintError(SoftCoverError, ValueError):
    """Type descriptors violate a marginal or divisibility constraint."""


class ConvergenceError(SoftCoverError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    ``last_iterate`` and ``residual`` describe where it stopped.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
