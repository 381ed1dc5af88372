"""Network states, exact characteristic oracle and grid evolution schemes."""

from .absorption import AbsorptionProfile, zero_absorption
from .oracle import (
    CharacteristicTracer,
    EvolvedData,
    oracle_cell_averages,
    oracle_perturbed_cell_averages,
    trace_value,
)
from .state import CellData, FunctionData, NetworkState, PolynomialData, l1_norm, total_mass
from .stepping import (
    SCHEMES,
    EvolveReport,
    evolve,
    evolve_perturbed,
    step_frozen,
    step_semilagrangian,
    step_times,
)

__all__ = [
    "AbsorptionProfile",
    "CellData",
    "CharacteristicTracer",
    "EvolveReport",
    "EvolvedData",
    "FunctionData",
    "NetworkState",
    "PolynomialData",
    "SCHEMES",
    "evolve",
    "evolve_perturbed",
    "l1_norm",
    "oracle_cell_averages",
    "oracle_perturbed_cell_averages",
    "step_frozen",
    "step_semilagrangian",
    "step_times",
    "total_mass",
    "trace_value",
    "zero_absorption",
]
