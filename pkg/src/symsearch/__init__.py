"""Symmetry-reduced continuous-time quantum walk search."""

from __future__ import annotations

from .dynamics import EvolutionTrace, Spectrum, eigendecompose, evolve, spectral_gap, success_probability
from .errors import (
    InvalidParameterError,
    NumericFailureError,
    ParseError,
    PartialResultError,
    ResourceLimitError,
    SymSearchError,
    UnsupportedFamilyError,
)
from .graph import (
    Graph,
    HamiltonianSpec,
    build_balanced_tree,
    build_complete,
    build_truncated_simplex,
    load_edge_list,
    search_hamiltonian,
)
from .reduction import ReducedBasis, ReducedHamiltonian, invariance_residual, lanczos_basis, reduce
from .search import (
    Schedule,
    orbit_basis,
    predicted_schedule,
    run_schedule,
    scan_gamma,
    verify_reduced_vs_full,
)

__version__ = "0.1.0"

__all__ = [
    "EvolutionTrace",
    "Graph",
    "HamiltonianSpec",
    "InvalidParameterError",
    "NumericFailureError",
    "ParseError",
    "PartialResultError",
    "ReducedBasis",
    "ReducedHamiltonian",
    "ResourceLimitError",
    "Schedule",
    "Spectrum",
    "SymSearchError",
    "UnsupportedFamilyError",
    "build_balanced_tree",
    "build_complete",
    "build_truncated_simplex",
    "eigendecompose",
    "evolve",
    "invariance_residual",
    "lanczos_basis",
    "load_edge_list",
    "orbit_basis",
    "predicted_schedule",
    "reduce",
    "run_schedule",
    "scan_gamma",
    "search_hamiltonian",
    "spectral_gap",
    "success_probability",
    "verify_reduced_vs_full",
]
