"""Exact diagonalization of bosonic pair-interaction Hamiltonians.

H = dGamma(T) + 1/2 sum_n lam_n Phi(g_n)^2 is unitarily equivalent to
dGamma(S) + E with S = sqrt(T^2 + W) and E = tr(S - T)/2. This package
computes S, E and the Bogoliubov pair (X, Y), checks them against a
truncated Fock-space oracle, and builds the standard example systems.
"""

from .bogoliubov import SymplecticPair, build_xy, symplectic_residuals
from .errors import PairDiagError
from .models import oscillator_field, pauli_fierz_dipole, single_pair, ti_fiber
from .operator_core import HermitianOperator, validate_hermitian
from .pair_model import (
    ConditionReport,
    Conjugation,
    DiagonalizationResult,
    PairModel,
    diagonalize,
    validate_conditions,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionReport",
    "Conjugation",
    "DiagonalizationResult",
    "HermitianOperator",
    "PairDiagError",
    "PairModel",
    "SymplecticPair",
    "build_xy",
    "diagonalize",
    "oscillator_field",
    "pauli_fierz_dipole",
    "single_pair",
    "symplectic_residuals",
    "ti_fiber",
    "validate_conditions",
    "validate_hermitian",
]
