"""Hierarchy of two-qubit quantum correlations computed from the correlation matrix R."""

from .collective import InterferenceModel, r_from_collective, simulate_counts, white_noise_counts
from .inference import MLEConfig, MonteCarloConfig, mle_reconstruct, monte_carlo_errors
from .measures import CorrMatrixR, MeasureSet, gws_oracle, measure_set, measures_from_R, werner_oracle
from .states import bloch_decompose, gws, werner

__all__ = [
    "CorrMatrixR",
    "InterferenceModel",
    "MLEConfig",
    "MeasureSet",
    "MonteCarloConfig",
    "bloch_decompose",
    "gws",
    "gws_oracle",
    "measure_set",
    "measures_from_R",
    "mle_reconstruct",
    "monte_carlo_errors",
    "r_from_collective",
    "simulate_counts",
    "werner",
    "werner_oracle",
    "white_noise_counts",
]
