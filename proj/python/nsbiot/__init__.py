"""Coupled Navier-Stokes / Biot mixed finite element solver."""

from ._core import (
    ConfigError,
    LevelSpec,
    PhysicalParams,
    StepFailure,
    convergence,
    convergence_study,
    error_fields,
    example1_levels,
    git_blob_sha1,
    oscillation_column,
    parse_levels,
    run,
    run_level,
    validate,
)

__all__ = [
    "ConfigError",
    "LevelSpec",
    "PhysicalParams",
    "StepFailure",
    "convergence",
    "convergence_study",
    "error_fields",
    "example1_levels",
    "git_blob_sha1",
    "oscillation_column",
    "parse_levels",
    "run",
    "run_level",
    "validate",
]
