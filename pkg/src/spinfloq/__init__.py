"""Floquet-engineered spin-spin lattices in phononic crystal networks.

Drive parameters are turned into effective hoppings, real-space and Bloch
Hamiltonians, topological invariants, edge-state reports and dephased
state-transfer traces.  Energies are in units of the bare rate J0 (hbar = 1).
"""

from spinfloq.errors import (
    DomainError,
    IllDefinedInvariantError,
    IntegratorAccuracyError,
    PositivityError,
    PreconditionError,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "IllDefinedInvariantError",
    "IntegratorAccuracyError",
    "PositivityError",
    "PreconditionError",
    "__version__",
]
