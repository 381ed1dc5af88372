"""
Transport on metric graphs with time-dependent velocities.

The library builds weighted metric graphs, evolves cell-averaged states along
characteristics, and provides resolvent and period-map diagnostics for the
underlying evolution family.
"""

from .config import SimConfig, parse_config, parse_config_dict
from .errors import (
    BoundViolation,
    ConfigError,
    DepthExceeded,
    GraphError,
    GraphflowError,
    NoConvergence,
    NonpositiveVelocity,
    NotPeriodic,
    ParseError,
    ReversedInterval,
    SchemaError,
    SingularBoundarySystem,
    StepTooLarge,
    ValidationError,
)
from .graph import (
    Edge,
    MetricGraph,
    build_incidence,
    build_line_adjacency,
    constant_domain_check,
    validate_conservation,
    velocity_adjacency,
)
from .velocity import VelocityProfile

__version__ = "0.1.0"

__all__ = [
    "BoundViolation",
    "ConfigError",
    "DepthExceeded",
    "Edge",
    "GraphError",
    "GraphflowError",
    "MetricGraph",
    "NoConvergence",
    "NonpositiveVelocity",
    "NotPeriodic",
    "ParseError",
    "ReversedInterval",
    "SchemaError",
    "SimConfig",
    "SingularBoundarySystem",
    "StepTooLarge",
    "ValidationError",
    "VelocityProfile",
    "build_incidence",
    "build_line_adjacency",
    "constant_domain_check",
    "parse_config",
    "parse_config_dict",
    "validate_conservation",
    "velocity_adjacency",
]
