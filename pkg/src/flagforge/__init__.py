"""Flag-based fault-tolerant dyadic rotation gadgets and their test harness."""

from .angles import DyadicAngle
from .circuits import Circuit, FaultSite, Instruction, QubitRole, compose, invert, stats
from .sv import (
    NoiseModel,
    ShotResult,
    StateVector,
    accepted_branch_state,
    logical_infidelity,
    run_noiseless,
    run_noisy_shot,
)

__version__ = "0.1.0"

__all__ = [
    "DyadicAngle",
    "Circuit",
    "Instruction",
    "FaultSite",
    "QubitRole",
    "compose",
    "invert",
    "stats",
    "NoiseModel",
    "ShotResult",
    "StateVector",
    "accepted_branch_state",
    "logical_infidelity",
    "run_noiseless",
    "run_noisy_shot",
    "__version__",
]
