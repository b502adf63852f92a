"""Generalized Ito correction for stochastic equations driven by colored noise."""

from .correction import (
    CorrectionFactor,
    LinearNoiseCoupling,
    decentered_correction,
    scalar_correction,
    spectral_factor,
    vector_correction,
)
from .errors import (
    ConfigurationError,
    EstimationError,
    NumericalConsistencyError,
    ProbeError,
    StepError,
    WrongOracleError,
)
from .experiment import ExperimentConfig, estimate_order, l2_error, run_ensemble
from .integrators import SchemeSpec, decentered_step, euler_step, reference_solve, run
from .noise import (
    NoiseRealization,
    NoiseSpec,
    autocorrelation,
    e_folding_time,
    increment_variance,
    sample_realization,
)
from .oracle import exact_constant_velocity, exact_varying_velocity, matrix_exponential
from .spectral import ModelConfig, SpectralState, build_operators, choose_truncation, initial_state

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "CorrectionFactor",
    "EstimationError",
    "ExperimentConfig",
    "LinearNoiseCoupling",
    "ModelConfig",
    "NoiseRealization",
    "NoiseSpec",
    "NumericalConsistencyError",
    "ProbeError",
    "SchemeSpec",
    "SpectralState",
    "StepError",
    "WrongOracleError",
    "autocorrelation",
    "build_operators",
    "choose_truncation",
    "decentered_correction",
    "decentered_step",
    "e_folding_time",
    "estimate_order",
    "euler_step",
    "exact_constant_velocity",
    "exact_varying_velocity",
    "increment_variance",
    "initial_state",
    "l2_error",
    "matrix_exponential",
    "reference_solve",
    "run",
    "run_ensemble",
    "sample_realization",
    "scalar_correction",
    "spectral_factor",
    "vector_correction",
]
