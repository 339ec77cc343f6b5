"""Automorphism test and closed-form generators for the structured families."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameterError, UnsupportedFamilyError
from ..graph import Graph
from .perm import FULL, GeneratorSet, Permutation


def _edge_codes(g: Graph, image: np.ndarray | None = None) -> np.ndarray:
    e = g.edge_array
    if image is not None:
        e = image[e]
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    return lo * g.n + hi


def is_automorphism(g: Graph, p: Permutation | np.ndarray) -> bool:
    """True iff ``p`` maps the edge set onto itself (equivalently D L D^-1 = L)."""
    image = np.asarray(p.image if isinstance(p, Permutation) else p, dtype=np.intp)
    if image.shape != (g.n,):
        raise InvalidParameterError(f"permutation degree {image.shape[-1]} != graph order {g.n}")
    if g.m == 0:
        return True
    # the map is injective on pairs, so E -> E suffices
    ref = _edge_codes(g)
    mapped = np.sort(_edge_codes(g, image))
    return bool(np.array_equal(mapped, ref))


def _tree_generators(r: int, M: int) -> list[np.ndarray]:
    start = {}
    idx = 0
    for level in range(r, -1, -1):
        start[level] = idx
        idx += M ** level
    n = idx
    gens = []
    for level in range(r):  # parents live on levels 0..r-1
        for parent in range(M ** level):
            for c in range(M - 1):
                a = parent * M + c  # offset of the left child on level+1
                img = np.arange(n)
                for depth in range(level + 1, r + 1):
                    block = M ** (depth - level - 1)
                    left = start[depth] + a * block + np.arange(block)
                    right = left + block
                    img[left], img[right] = right, left.copy()
                gens.append(img)
    return gens


def family_generators(g: Graph) -> GeneratorSet:
    """Generators of Aut(g) written down from the family structure.

    Complete graphs get adjacent transpositions; balanced trees get swaps of
    neighbouring child subtrees under every internal vertex. Other families
    must go through :func:`find_automorphisms`.
    """
    if g.family == "complete":
        gens = [Permutation.transposition(g.n, i, i + 1).image for i in range(g.n - 1)]
        return GeneratorSet(g.n, np.array(gens, dtype=np.intp).reshape(-1, g.n), FULL)
    if g.family == "balanced_tree":
        gens = _tree_generators(g.params["r"], g.params["M"])
        return GeneratorSet(g.n, np.array(gens), FULL)
    raise UnsupportedFamilyError(
        f"no closed-form generators for family {g.family!r}; use find_automorphisms")
