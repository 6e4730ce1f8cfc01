"""Score-function estimation from samples with spectral Stein methods."""

from .errors import (
    AllZeroSpectrum,
    ConfigError,
    DegenerateSamples,
    EigensolverFailure,
    InvalidRank,
    NonFiniteEnergy,
    SingularSystem,
    SpecScoreError,
)
from .kernel import median_bandwidth
from .spectral import SpectralBasis, build_basis
from .ssge import ScoreEstimator, fit
from .stein import SteinFit, SteinPlus, stein_fit, stein_plus

__version__ = "0.1.0"

__all__ = [
    "AllZeroSpectrum",
    "ConfigError",
    "DegenerateSamples",
    "EigensolverFailure",
    "InvalidRank",
    "NonFiniteEnergy",
    "ScoreEstimator",
    "SingularSystem",
    "SpecScoreError",
    "SpectralBasis",
    "SteinFit",
    "SteinPlus",
    "build_basis",
    "fit",
    "median_bandwidth",
    "stein_fit",
    "stein_plus",
]
