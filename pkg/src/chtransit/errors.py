"""Exception hierarchy shared by all modules."""


class ChTransitError(Exception):
    """Base class for toolkit errors."""


class ResonanceError(ChTransitError, ValueError):
    """Reduced coefficients requested too close to a slaving pole."""


class UnsupportedPrediction(ChTransitError):
    """Amplitude prediction requested outside the continuous-transition regime."""


class NumericalFailure(ChTransitError, RuntimeError):
    """NaN, overflow, blow-up or non-convergence in a numerical routine."""


class ConfigError(ChTransitError, ValueError):
    """Malformed or invalid run configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
