import click


class CritBubbleError(click.ClickException):
    pass


class DomainError(CritBubbleError):
    exit_code = 2


class DivergenceError(CritBubbleError):
    pass


class ToleranceNotMetError(CritBubbleError):
    """Raised when a quadrature could not reach the requested tolerance.

    :ivar float estimate: The best value obtained.
    :ivar float error: The achieved error estimate.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class InternalConsistencyError(CritBubbleError):
    pass


class UnsupportedInputError(CritBubbleError):
    pass


class UnreliableValueError(CritBubbleError):
    pass


class FitFailureError(CritBubbleError):
    """Raised when a bubble fit does not converge.

    :ivar best: The best iterate found, as a :class:`~critbubble.bubble.Bubble`.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NoConcentrationError(CritBubbleError):
    pass


class ConfigurationError(CritBubbleError):
    exit_code = 2


class AcceptanceError(CritBubbleError):
    exit_code = 1


class PartialFailureError(CritBubbleError):
    exit_code = 3


class DiagonalSingularityError(DomainError):
    pass
