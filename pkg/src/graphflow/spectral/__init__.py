"""Generator, resolvent and period-map computations."""

from .functions import SmoothEdgeFunction, boundary_residual, generator_apply
from .monodromy import (
    MonodromyApprox,
    StabilityReport,
    growth_bound_fit,
    growth_rate_fit,
    monodromy_assemble,
    spectral_radius,
)
from .resolvent import (
    ResolventCheck,
    ResolventSolution,
    laplace_resolvent,
    resolvent_apply,
    resolvent_check,
    resolvent_identity_residual,
)

__all__ = [
    "MonodromyApprox",
    "ResolventCheck",
    "ResolventSolution",
    "SmoothEdgeFunction",
    "StabilityReport",
    "boundary_residual",
    "generator_apply",
    "growth_bound_fit",
    "growth_rate_fit",
    "laplace_resolvent",
    "monodromy_assemble",
    "resolvent_apply",
    "resolvent_check",
    "resolvent_identity_residual",
    "spectral_radius",
]
