"""Deterministic Schreier-Sims: base, strong generators and group order."""

from __future__ import annotations

from math import prod

import numpy as np

from ..errors import ResourceLimitError
from .perm import GeneratorSet

DEFAULT_DEGREE_CAP = 512
DEFAULT_STRONG_CAP = 4096


class StabilizerChain:
    """Stabilizer chain built incrementally from generators.

    ``base[i]`` is the i-th base point; ``orbits[i]`` maps each point of the
    basic orbit to a coset representative sending ``base[i]`` there.
    """

    def __init__(self, n: int, strong_cap: int = DEFAULT_STRONG_CAP):
        self.n = n
        self.identity = np.arange(n)
        self.base: list[int] = []
        self.strong: list[np.ndarray] = []
        self.orbits: list[dict[int, np.ndarray]] = []
        self.level_gens: list[list[np.ndarray]] = []
        self.strong_cap = strong_cap

    # -- internals ---------------------------------------------------------

    def _level_generators(self, i: int) -> list[np.ndarray]:
        fixed = self.base[:i]
        return [s for s in self.strong if all(s[b] == b for b in fixed)]

    def _rebuild_level(self, i: int) -> None:
        gens = self._level_generators(i)
        b = self.base[i]
        trans = {b: self.identity}
        queue = [b]
        for x in queue:
            u = trans[x]
            for g in gens:
                y = int(g[x])
                if y not in trans:
                    trans[y] = g[u]
                    queue.append(y)
        self.level_gens[i] = gens
        self.orbits[i] = trans

    def _inverse(self, p: np.ndarray) -> np.ndarray:
        inv = np.empty_like(p)
        inv[p] = self.identity
        return inv

    def sift(self, g: np.ndarray, start: int = 0) -> tuple[np.ndarray, int]:
        for i in range(start, len(self.base)):
            x = int(g[self.base[i]])
            u = self.orbits[i].get(x)
            if u is None:
                return g, i
            g = self._inverse(u)[g]
        return g, len(self.base)

    def _is_identity(self, g: np.ndarray) -> bool:
        return bool(np.array_equal(g, self.identity))

    def _add_strong(self, h: np.ndarray, j: int) -> None:
        if len(self.strong) >= self.strong_cap:
            raise ResourceLimitError(f"stabilizer chain exceeded {self.strong_cap} strong generators")
        self.strong.append(h)
        if j == len(self.base):
            moved = np.flatnonzero(h != self.identity)
            self.base.append(int(moved[0]))
            self.orbits.append({})
            self.level_gens.append([])

    def _complete_from(self, i: int) -> None:
        # Holt's SCHREIERSIMS loop, restarted at the level that gained a generator
        while i >= 0:
            restart = None
            trans = self.orbits[i]
            for x, u in list(trans.items()):
                for s in self.level_gens[i]:
                    y = int(s[x])
                    sg = self._inverse(trans[y])[s[u]]
                    h, j = self.sift(sg, i + 1)
                    if not self._is_identity(h):
                        self._add_strong(h, j)
                        for level in range(i + 1, j + 1):
                            self._rebuild_level(level)
                        restart = j
                        break
                if restart is not None:
                    break
            if restart is None:
                i -= 1
            else:
                i = restart

    # -- public ------------------------------------------------------------

    def add_generator(self, g) -> bool:
        """Extend the group by ``g``; return False when ``g`` is already a member."""
        g = np.asarray(g, dtype=np.intp)
        h, j = self.sift(g)
        if self._is_identity(h):
            return False
        self._add_strong(h, j)
        for level in range(0, j + 1):
            self._rebuild_level(level)
        self._complete_from(j)
        return True

    def contains(self, g) -> bool:
        h, _ = self.sift(np.asarray(g, dtype=np.intp))
        return self._is_identity(h)

    def order(self) -> int:
        return prod(len(t) for t in self.orbits)


def stabilizer_chain(gs: GeneratorSet, *, degree_cap: int = DEFAULT_DEGREE_CAP,
                     strong_cap: int = DEFAULT_STRONG_CAP) -> StabilizerChain:
    if gs.n > degree_cap:
        raise ResourceLimitError(f"degree {gs.n} exceeds cap {degree_cap}")
    chain = StabilizerChain(gs.n, strong_cap)
    for g in gs.images:
        chain.add_generator(g)
    return chain


def group_order(gs: GeneratorSet, *, degree_cap: int = DEFAULT_DEGREE_CAP,
                strong_cap: int = DEFAULT_STRONG_CAP) -> int:
    """Order of the group generated by ``gs`` (exact Python integer)."""
    return stabilizer_chain(gs, degree_cap=degree_cap, strong_cap=strong_cap).order()
