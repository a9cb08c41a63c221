"""Exception hierarchy shared by the library and the command-line front end."""


class ResponseError(Exception):
    """Base class for all errors raised by this package."""


class ModelValidationError(ResponseError, ValueError):
    """A medium model violates a parameter invariant.

    ``index`` is the offending transition, or ``None`` for model-level
    problems.
    """

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"transition {index}: {message}"
        super().__init__(message)


class DegenerateModelError(ResponseError, ValueError):
    """The inverse permeability vanishes, so the permeability is undefined."""


class SumRuleError(ResponseError, ValueError):
    """An operation needs a model whose high-frequency sum rule is satisfied."""


class GridError(ResponseError, ValueError):
    """A frequency or time grid is malformed or too coarse for the request."""


class RegimeError(ResponseError, ValueError):
    """An approximation was requested outside the regime where it is claimed."""


class InfeasibleStrategyError(ResponseError, ValueError):
    """Completing the model would require a negative transition strength."""
