"""Trapezoid subsystem codes toolkit.

Construction of the two-parameter trapezoid code family, synthesis and
verification of 2-local dressed logical operators, penalty-Hamiltonian
spectra with scaling fits, and embedding of the induced interaction graph
into hardware connectivity graphs.
"""

__version__ = "0.1.0"

from .codes import (
    CodeParams,
    SubsystemCode,
    TrapezoidParams,
    build_trapezoid_matrix,
    code_params,
    generic_code,
    trapezoid_code,
)
from .f2 import Pauli, SymplecticSpan, symplectic_product

__all__ = [
    "__version__",
    "CodeParams",
    "SubsystemCode",
    "TrapezoidParams",
    "build_trapezoid_matrix",
    "code_params",
    "generic_code",
    "trapezoid_code",
    "Pauli",
    "SymplecticSpan",
    "symplectic_product",
]
