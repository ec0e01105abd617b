"""Exception hierarchy shared by every leedecay module."""


class LeeDecayError(Exception):
    """Base class for all errors raised by leedecay."""


class ModelError(LeeDecayError, ValueError):
    pass


class EmptyChannels(ModelError):
    pass


class InvertedWindow(ModelError):
    pass


class NegativeCoupling(ModelError):
    pass


class EvaluationAtLogSingularity(LeeDecayError, ValueError):
    """Raised when the self-energy is requested exactly on a window edge."""


class NormalizationFailure(LeeDecayError):
    pass


class BracketingFailure(LeeDecayError):
    pass


class NoSignChange(LeeDecayError, ValueError):
    pass


class NonConvergence(LeeDecayError):
    """Adaptive quadrature did not meet its tolerance."""


QuadratureNonConvergence = NonConvergence


class PhaseBudgetOverflow(NonConvergence):
    pass


class DivisionNearZero(LeeDecayError, ZeroDivisionError):
    pass


class DomainError(LeeDecayError, ValueError):
    pass


class ChannelCountError(LeeDecayError, ValueError):
    pass


class ConfigError(LeeDecayError, ValueError):
    """Invalid run configuration; ``field`` names the offending dotted key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
