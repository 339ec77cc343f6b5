from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from symsearch.graph import Graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def small_graphs(draw, min_n: int = 2, max_n: int = 7):
    """Random simple graphs; edges drawn as a subset of all pairs."""
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [p for p, keep in zip(pairs, mask) if keep])


def brute_force_automorphisms(g: Graph) -> list[tuple[int, ...]]:
    edges = set(g.edges)
    out = []
    for p in itertools.permutations(range(g.n)):
        if all(tuple(sorted((p[u], p[v]))) in edges for u, v in g.edges):
            out.append(p)
    return out


def group_closure(gens: np.ndarray, n: int) -> set[tuple[int, ...]]:
    """Every element of the group generated by ``gens`` (small groups only)."""
    ident = tuple(range(n))
    seen = {ident}
    frontier = [np.arange(n)]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                k = tuple(g[h])
                if k not in seen:
                    seen.add(k)
                    nxt.append(np.array(k))
        frontier = nxt
    return seen


@pytest.fixture(scope="session")
def tree4():
    from symsearch.graph import build_balanced_tree
    return build_balanced_tree(2, 4)


@pytest.fixture(scope="session")
def simplex25():
    from symsearch.graph import build_truncated_simplex
    return build_truncated_simplex(2, 5)
