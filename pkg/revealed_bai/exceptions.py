"""
Exceptions

Error hierarchy shared by every module of the package.
"""


class RevealedBAIError(Exception):
    """Base class for all errors raised by the package."""


class ConfigurationError(RevealedBAIError, ValueError):
    """A precondition on user-supplied parameters was violated."""


class TooFewArms(ConfigurationError):
    """An instance needs at least two arms."""


class DuplicateMax(ConfigurationError):
    """The maximum arm mean is not unique."""


class ArmOutOfRange(ConfigurationError, IndexError):
    """An arm index outside [0, K) was used."""


class InvalidGap(ConfigurationError):
    """The requested best-minus-second-best gap is not positive."""


class InvalidDelta(ConfigurationError):
    """The confidence parameter delta is outside its admissible range."""


class InvalidBudget(ConfigurationError):
    """A fixed horizon or cap is not a positive integer."""


class BudgetTooSmall(InvalidBudget):
    """EXP3 horizon does not exceed K ln K."""


class InvalidC(ConfigurationError):
    """The lower-bound slack c is outside (0, 1/2)."""


class BudgetBelowK(ConfigurationError):
    """The lower-bound budget N0 does not exceed the number of arms."""


class DegenerateConstruction(ConfigurationError):
    """The hard instance pair would share a best arm (d <= eps)."""


class RewardMissing(ConfigurationError):
    """An acceptance was recorded without a realized reward."""


class RewardUnexpected(ConfigurationError):
    """A rejection was recorded together with a reward."""


class UnsupportedFormat(ConfigurationError):
    """Requested output format is not csv or json."""


class EmptyInput(ConfigurationError):
    """Nothing to emit."""


class EmptyAlgorithmList(ConfigurationError):
    """An experiment cell lists no algorithms."""


class UnknownAlgorithm(ConfigurationError):
    """An algorithm name is not registered."""


class InstanceMismatch(ConfigurationError):
    """Arm count of an instance disagrees with its experiment cell."""


class InvariantViolation(RevealedBAIError, AssertionError):
    """A runtime-asserted property of a simulated run failed."""


class SessionHalted(RevealedBAIError):
    """
    Raised by a session when its acceptance or step cap is reached.

    Attributes:
        reason: 'acceptances' or 'steps'
    """

    def __init__(self, reason: str):
        super().__init__(f"session halted: {reason} cap reached")
        self.reason = reason
