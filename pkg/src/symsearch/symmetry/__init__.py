"""Graph symmetries: permutations, automorphism generators, stabilizers, orbits."""

from .families import family_generators, is_automorphism
from .perm import (
    FULL,
    USER,
    GeneratorSet,
    OrbitPartition,
    Permutation,
    orbit_of,
    orbits,
    project_trivial,
    stabilizer,
)
from .schreier_sims import StabilizerChain, group_order, stabilizer_chain
from .search import find_automorphisms

__all__ = [
    "FULL",
    "USER",
    "GeneratorSet",
    "OrbitPartition",
    "Permutation",
    "StabilizerChain",
    "family_generators",
    "find_automorphisms",
    "group_order",
    "is_automorphism",
    "orbit_of",
    "orbits",
    "project_trivial",
    "stabilizer",
    "stabilizer_chain",
]
