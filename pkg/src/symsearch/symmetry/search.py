"""Generic automorphism group search by individualization and refinement.

The search follows one leftmost path of the refinement tree to a discrete
partition, then walks back up. At each level it tries to map the path's
individualized vertex to every other vertex of the target cell that is not
already known to lie in the same orbit; a success produces a generator.
Processing levels deepest first makes the union of generators found so far
generate the pointwise stabilizer of the path prefix, so the result generates
the full automorphism group.
"""

from __future__ import annotations

import time

import numpy as np

from ..errors import InvalidParameterError, PartialResultError, ResourceLimitError
from ..graph import Graph
from .families import is_automorphism
from .perm import FULL, GeneratorSet

DEFAULT_CAP = 512


def _rank(keys: np.ndarray) -> np.ndarray:
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    return inv.reshape(-1)


class _Refiner:
    def __init__(self, g: Graph):
        e = g.edge_array
        self.n = g.n
        self.src = np.concatenate([e[:, 0], e[:, 1]])
        self.dst = np.concatenate([e[:, 1], e[:, 0]])

    def refine(self, colors: np.ndarray) -> tuple[np.ndarray, bytes]:
        """Iterated neighbour-colour refinement to the coarsest equitable partition.

        New colours are ranks of (old colour, neighbour-colour counts) rows, so
        the result and the returned quotient invariant are label independent.
        """
        n = self.n
        k = int(colors.max()) + 1
        while True:
            flat = np.bincount(self.src * k + colors[self.dst], minlength=n * k)
            sig = np.column_stack([colors, flat.reshape(n, k)])
            uniq, inv = np.unique(sig, axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            if len(uniq) == k:
                return inv, uniq.tobytes()
            colors, k = inv, len(uniq)

    @staticmethod
    def individualize(colors: np.ndarray, v: int) -> np.ndarray:
        keys = 2 * colors
        keys[colors == colors[v]] += 1
        keys[v] -= 1
        return _rank(keys)

    @staticmethod
    def target_cell(colors: np.ndarray) -> np.ndarray | None:
        counts = np.bincount(colors)
        big = np.flatnonzero(counts > 1)
        if not len(big):
            return None
        c = big[np.argmin(counts[big])]
        return np.flatnonzero(colors == c)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union_perm(self, perm: np.ndarray) -> None:
        for i, j in enumerate(perm.tolist()):
            a, b = self.find(i), self.find(j)
            if a != b:
                self.parent[max(a, b)] = min(a, b)


def find_automorphisms(g: Graph, *, marked: int | None = None, cap: int = DEFAULT_CAP,
                       timeout: float | None = None) -> GeneratorSet:
    """Generators of Aut(g), or of the stabilizer of ``marked`` when given.

    Raises :class:`ResourceLimitError` when ``g.n > cap`` and
    :class:`PartialResultError` (carrying the generators found so far) when
    ``timeout`` seconds elapse first.
    """
    if g.n > cap:
        raise ResourceLimitError(f"graph has {g.n} vertices, automorphism search cap is {cap}")
    if marked is not None and not 0 <= marked < g.n:
        raise InvalidParameterError(f"marked vertex {marked} out of range")
    deadline = None if timeout is None else time.monotonic() + timeout
    claims = FULL if marked is None else f"stabilizer_of({marked})"
    ref = _Refiner(g)
    n = g.n

    keys = np.column_stack([g.degrees, np.zeros(n, dtype=np.intp)])
    if marked is not None:
        keys[marked, 1] = 1
    colors, inv0 = ref.refine(_rank(keys))

    # leftmost path: path[d] = (colours before individualizing, target cell, chosen vertex)
    path = []
    invariants = [inv0]
    while True:
        cell = ref.target_cell(colors)
        if cell is None:
            break
        v = int(cell[0])
        path.append((colors, cell, v))
        colors, inv = ref.refine(ref.individualize(colors, v))
        invariants.append(inv)
    leaf_order = np.argsort(colors)

    gens: list[np.ndarray] = []

    def check_time():
        if deadline is not None and time.monotonic() > deadline:
            raise PartialResultError("automorphism search timed out; generator set incomplete",
                                     partial=GeneratorSet(n, np.array(gens).reshape(-1, n), claims))

    def descend(colors: np.ndarray, depth: int) -> np.ndarray | None:
        check_time()
        cell = ref.target_cell(colors)
        if cell is None:
            perm = np.empty(n, dtype=np.intp)
            perm[leaf_order] = np.argsort(colors)
            return perm if is_automorphism(g, perm) else None
        if depth >= len(path) or len(cell) != len(path[depth][1]):
            return None
        for x in cell:
            child, inv = ref.refine(ref.individualize(colors, int(x)))
            if inv != invariants[depth + 1]:
                continue
            found = descend(child, depth + 1)
            if found is not None:
                return found
        return None

    uf = _UnionFind(n)
    for depth in range(len(path) - 1, -1, -1):
        colors_d, cell, v = path[depth]
        for u in cell.tolist():
            if uf.find(u) == uf.find(v):
                continue
            child, inv = ref.refine(ref.individualize(colors_d, u))
            if inv != invariants[depth + 1]:
                continue
            perm = descend(child, depth + 1)
            if perm is not None:
                gens.append(perm)
                uf.union_perm(perm)
    return GeneratorSet(n, np.array(gens, dtype=np.intp).reshape(-1, n), claims)
