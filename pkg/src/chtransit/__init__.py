"""Dynamic transition analysis for Cahn-Hilliard binary systems.

Closed-form transition criteria, center-manifold reduced equations, a
pseudospectral solver for verification, and phase-diagram predictions.
"""

__version__ = "0.1.0"

from .classifier import (  # noqa: E402
    TransitionReport,
    TransitionType,
    classify_coupled,
    classify_general,
    classify_loop,
    classify_rectangular,
    classify_whole_space,
    predict_amplitudes,
    reduced_coefficients,
)
from .errors import ConfigError, NumericalFailure, ResonanceError, UnsupportedPrediction  # noqa: E402
from .params import CoupledParams, ModelParams  # noqa: E402
from .spectral import DomainSpec, ModeIndex, SpectralField  # noqa: E402

__all__ = [
    "ConfigError",
    "CoupledParams",
    "DomainSpec",
    "ModeIndex",
    "ModelParams",
    "NumericalFailure",
    "ResonanceError",
    "SpectralField",
    "TransitionReport",
    "TransitionType",
    "UnsupportedPrediction",
    "classify_coupled",
    "classify_general",
    "classify_loop",
    "classify_rectangular",
    "classify_whole_space",
    "predict_amplitudes",
    "reduced_coefficients",
]
