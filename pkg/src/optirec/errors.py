"""Exception hierarchy shared by all optirec modules."""


class OptirecError(Exception):
    """Base class for every error raised by optirec."""


class NumericalError(OptirecError):
    """A numerical routine could not deliver the requested accuracy."""


class QuadratureFailure(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class GridTooNarrow(NumericalError):
    """The filter support does not fit inside the frequency grid."""


class HermitianViolation(NumericalError):
    pass


class DomainError(OptirecError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstraintViolation(DomainError):
    pass


class InvalidWeights(DomainError):
    """A weight pair fails the evenness/positivity/monotone-ratio screen."""


class InsufficientTrials(OptirecError, ValueError):
    pass
