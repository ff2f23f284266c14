"""Exception hierarchy.

Two families are distinguished so that the command line can map them to
exit codes: :class:`ValidationError` for inputs that violate a
precondition and :class:`NumericalError` for failures of a numerical
procedure on otherwise valid input.
"""


class MelnikovError(Exception):
    """Base class for all package errors."""


class ValidationError(MelnikovError):
    """Input violates a stated precondition."""


class NumericalError(MelnikovError):
    """A numerical procedure failed on valid input."""


# model
class CenterConditionViolated(ValidationError):
    pass


class SaddleConditionViolated(ValidationError):
    pass


class TangencyMismatch(ValidationError):
    pass


class CenterOffsetNotPositive(ValidationError):
    """The normalized center offset beta_C is not positive (reflect first)."""


class EnergyOutOfRange(ValidationError):
    pass


class EmptyAnnulus(ValidationError):
    pass


class ParseError(ValidationError):
    pass


# flows
class DegenerateEigenstructure(NumericalError):
    pass


class LogSingularity(NumericalError):
    pass


class NoCrossing(NumericalError):
    pass


class TangentialCrossing(NumericalError):
    pass


# melnikov / expansion
class QuadratureNonConvergence(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass


# design
class RankDeficient(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


class Lambda1Singular(NumericalError):
    pass


class Lambda2Zero(NumericalError):
    pass


class D3Vanishes(NumericalError):
    pass


# verify
class OrbitEscaped(NumericalError):
    pass


class TangencyEncountered(NumericalError):
    pass


class BracketLost(NumericalError):
    pass
