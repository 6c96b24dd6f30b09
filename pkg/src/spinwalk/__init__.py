"""Exact simulation of a coined quantum walk coupled to spins on the lattice edges."""

__version__ = "0.1.0"

from .evolution import CoinField, Coupling, StepOperator, evolve, step, step_edge_basis
from .experiment import ConfigError, WalkConfig, run
from .hilbert import (
    BasisIndex,
    Boundary,
    InitialStateSpec,
    Lattice,
    ResourceCapError,
    StateVector,
    build_initial_state,
)

__all__ = [
    "BasisIndex", "Boundary", "CoinField", "ConfigError", "Coupling", "InitialStateSpec",
    "Lattice", "ResourceCapError", "StateVector", "StepOperator", "WalkConfig",
    "build_initial_state", "evolve", "run", "step", "step_edge_basis",
]
