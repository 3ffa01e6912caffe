"""Cavity-dressed Hamiltonians (CDH) for strongly coupled light-matter models.

Builds polaron-rotated, Fock-truncated Hamiltonians for the quantum Rabi
model and Dicke-Heisenberg spin chains, diagonalizes them, and computes
ground-state and thermal observables with a bare-truncation oracle for
convergence checks.
"""

from cdh.cdh import (
    DickeHeisenbergModel,
    DressingValues,
    RabiModel,
    Truncation,
    build_bare,
    build_cdh_dicke_heisenberg_closed_form,
    build_cdh_generic,
    build_cdh_rabi_closed_form,
    deep_strong_limit_cdh,
    dressing_values,
    rabi_m2_eigenvalues,
)
from cdh.operators import ChainGeometry, pauli

__all__ = [
    "ChainGeometry",
    "DickeHeisenbergModel",
    "DressingValues",
    "RabiModel",
    "Truncation",
    "build_bare",
    "build_cdh_dicke_heisenberg_closed_form",
    "build_cdh_generic",
    "build_cdh_rabi_closed_form",
    "deep_strong_limit_cdh",
    "dressing_values",
    "pauli",
    "rabi_m2_eigenvalues",
]

__version__ = "0.1.0"
