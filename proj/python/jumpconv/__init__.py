"""Stochastic convolutions driven by marked Poisson random measures."""

from ._core import (
    ConfigError,
    ConvolutionScenario,
    DomainError,
    FieldIntegrand,
    Generator,
    HypothesisError,
    MarkSpace,
    NumericError,
    PoissonPath,
    SmoothSpace,
    convolution_path,
    convolve_at,
    inequality_report,
    ito_isometry_report,
    load_scenario,
    run_cli,
    sample_path,
    stopped_report,
    strong_solution_residual,
)

__all__ = [
    "ConfigError",
    "ConvolutionScenario",
    "DomainError",
    "FieldIntegrand",
    "Generator",
    "HypothesisError",
    "MarkSpace",
    "NumericError",
    "PoissonPath",
    "SmoothSpace",
    "convolution_path",
    "convolve_at",
    "inequality_report",
    "ito_isometry_report",
    "load_scenario",
    "run_cli",
    "sample_path",
    "stopped_report",
    "strong_solution_residual",
]
