"""Nonlinear car-following controller: simulation and stability analysis."""

from ._core import (
    ControllerParams,
    DomainError,
    OracleError,
    ParameterError,
    ScenarioLookupError,
    control,
    count_string_stable,
    eigenvalues,
    magnitude_M,
    magnitude_M1,
    scenario_names,
    shaper,
    shaper_inverse,
    simulate,
    string_stable,
    wrapper,
)

__all__ = [
    "ControllerParams",
    "DomainError",
    "OracleError",
    "ParameterError",
    "ScenarioLookupError",
    "control",
    "count_string_stable",
    "eigenvalues",
    "magnitude_M",
    "magnitude_M1",
    "scenario_names",
    "shaper",
    "shaper_inverse",
    "simulate",
    "string_stable",
    "wrapper",
]
