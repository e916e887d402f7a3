"""Spectral and time-domain analysis of a locally damped Timoshenko beam."""

from .beam_model import (
    BeamParams,
    ConfigError,
    DampingProfile,
    DimensionError,
    Grid,
    RunOptions,
    SecondOrderState,
    energy_norm,
    load_config,
    parse_config,
    state_norm,
)
from .discrete import DiscreteOperator, build_operator
from .riemann_transform import (
    ConstraintError,
    RiemannState,
    constraint_values,
    domain_check,
    forward_transform,
    inverse_transform,
    project_X0,
)

__all__ = [
    "BeamParams",
    "ConfigError",
    "ConstraintError",
    "DampingProfile",
    "DimensionError",
    "DiscreteOperator",
    "Grid",
    "RiemannState",
    "RunOptions",
    "SecondOrderState",
    "build_operator",
    "constraint_values",
    "domain_check",
    "energy_norm",
    "forward_transform",
    "inverse_transform",
    "load_config",
    "parse_config",
    "project_X0",
    "state_norm",
]
