"""Graph families used in the search experiments and their matrices.

Sign convention: the Laplacian carries ``-deg(j)`` on the diagonal and ``+1``
on edges, so that ``H = -gamma * L - |w><w|`` has a ground state close to the
uniform superposition. Most graph-theory texts use the opposite sign.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameterError, ParseError

FAMILIES = ("complete", "balanced_tree", "truncated_simplex", "custom")
MATRIX_KINDS = ("laplacian", "adjacency")


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``edges`` is stored as a lexicographically sorted tuple of pairs ``(u, v)``
    with ``u < v``; construct through the builders or :meth:`from_edges`.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    family: str = "custom"
    params: dict = field(default_factory=dict)
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"vertex count must be >= 1, got {self.n}")
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}")
        if self.labels is not None and len(self.labels) != self.n:
            raise InvalidParameterError("labels must name every vertex")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], family="custom",
                   params=None, labels=None) -> "Graph":
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"edge ({u}, {v}) out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise InvalidParameterError(f"duplicate edge {key}")
            seen.add(key)
        return cls(n, tuple(sorted(seen)), family, dict(params or {}),
                   None if labels is None else tuple(labels))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` integer array, rows sorted."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.intp)
        return np.asarray(self.edges, dtype=np.intp)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.intp)
        e = self.edge_array
        np.add.at(deg, e[:, 0], 1)
        np.add.at(deg, e[:, 1], 1)
        return deg

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nb: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].append(v)
            nb[v].append(u)
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def adjacency_sparse(self) -> sp.csr_matrix:
        e = self.edge_array
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows), dtype=np.int8)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def is_regular(self) -> bool:
        return bool(np.all(self.degrees == self.degrees[0]))

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def summary(self) -> str:
        deg = self.degrees
        if self.is_regular():
            return f"n={self.n} m={self.m} regular={int(deg[0])}"
        return f"n={self.n} m={self.m} min_degree={int(deg.min())} max_degree={int(deg.max())}"


def build_complete(n: int) -> Graph:
    if n < 2:
        raise InvalidParameterError(f"complete graph needs n >= 2, got {n}")
    edges = ((u, v) for u in range(n) for v in range(u + 1, n))
    return Graph.from_edges(n, edges, "complete", {"n": n})


def build_balanced_tree(height: int, branching: int) -> Graph:
    """Balanced tree with leaves first and the root as the last vertex.

    Levels are laid out bottom-up: the ``M**r`` leaves take indices
    ``0..M**r - 1``, the level above follows, and so on. Within a level the
    children of the vertex at offset ``k`` sit at offsets ``k*M .. k*M + M-1``.
    """
    r, M = height, branching
    if r < 1 or M < 2:
        raise InvalidParameterError(f"balanced tree needs r >= 1 and M >= 2, got r={r}, M={M}")
    # start[level] = index of the first vertex on that level (level 0 = root)
    start = {}
    idx = 0
    for level in range(r, -1, -1):
        start[level] = idx
        idx += M ** level
    n = idx
    edges = []
    labels = [""] * n
    for level in range(r + 1):
        for k in range(M ** level):
            labels[start[level] + k] = "root" if level == 0 else f"L{level}.{k}"
    for level in range(1, r + 1):
        for k in range(M ** level):
            edges.append((start[level] + k, start[level - 1] + k // M))
    return Graph.from_edges(n, edges, "balanced_tree", {"r": r, "M": M}, labels)


def build_truncated_simplex(order: int, M: int) -> Graph:
    """Truncated M-simplex lattice of the given order.

    Order 0 is ``K_{M+1}``. Each further order replaces vertex ``v`` by the
    clique ``v*M .. v*M + M-1``; clique member ``k`` inherits the edge to the
    ``k``-th smallest neighbour of ``v``.
    """
    if order < 0 or M < 2:
        raise InvalidParameterError(f"truncated simplex needs order >= 0 and M >= 2, got {order}, {M}")
    n = M + 1
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    labels = [str(v) for v in range(n)]
    for _ in range(order):
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        pos = [{u: k for k, u in enumerate(sorted(nb))} for nb in nbrs]
        new_edges = []
        for v in range(n):
            base = v * M
            new_edges.extend((base + a, base + b) for a in range(M) for b in range(a + 1, M))
        for u, v in edges:
            new_edges.append((u * M + pos[u][v], v * M + pos[v][u]))
        labels = [f"{labels[v]}.{k}" for v in range(n) for k in range(M)]
        n *= M
        edges = new_edges
    return Graph.from_edges(n, edges, "truncated_simplex", {"order": order, "M": M}, labels)


def load_edge_list(source: str | TextIO) -> Graph:
    """Parse the ``n m`` header plus ``m`` lines of ``u v`` into a custom graph."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(stream)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty edge list", 1)

    def ints(lineno, text, count):
        parts = text.split()
        if len(parts) != count:
            raise ParseError(f"expected {count} integers, got {text!r}", lineno)
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"non-integer token in {text!r}", lineno) from None

    lineno, header = lines[0]
    n, m = ints(lineno, header, 2)
    if n < 1 or m < 0:
        raise ParseError(f"invalid header {header!r}", lineno)
    if len(lines) - 1 != m:
        raise ParseError(f"header declares {m} edges, found {len(lines) - 1}",
                         lines[-1][0] if len(lines) > 1 else lineno)
    seen: set[tuple[int, int]] = set()
    for lineno, text in lines[1:]:
        u, v = ints(lineno, text, 2)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex index out of range in {text!r}", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"duplicate edge {key}", lineno)
        seen.add(key)
    return Graph(n, tuple(sorted(seen)), "custom", {})


def dump_edge_list(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def adjacency(g: Graph) -> np.ndarray:
    A = np.zeros((g.n, g.n))
    e = g.edge_array
    A[e[:, 0], e[:, 1]] = 1.0
    A[e[:, 1], e[:, 0]] = 1.0
    return A


def laplacian(g: Graph) -> np.ndarray:
    L = adjacency(g)
    L[np.diag_indices(g.n)] = -g.degrees
    return L


@dataclass(frozen=True)
class HamiltonianSpec:
    """Which graph matrix to use, the jumping rate, and the marked vertex (if any)."""

    matrix_kind: str = "laplacian"
    gamma: float = 1.0
    marked: int | None = None

    def __post_init__(self):
        if self.matrix_kind not in MATRIX_KINDS:
            raise InvalidParameterError(f"matrix_kind must be one of {MATRIX_KINDS}")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidParameterError(f"gamma must be finite and positive, got {self.gamma}")

    def validate_for(self, g: Graph) -> None:
        if self.marked is not None and not 0 <= self.marked < g.n:
            raise InvalidParameterError(f"marked vertex {self.marked} out of range for n={g.n}")


def search_hamiltonian(g: Graph, spec: HamiltonianSpec, *, sparse: bool = False):
    """``-gamma * X - |w><w|`` with X the Laplacian or adjacency matrix.

    The oracle term is skipped when ``spec.marked`` is None. ``sparse=True``
    returns a CSR matrix with the same entries.
    """
    spec.validate_for(g)
    return _hamiltonian(g, spec.matrix_kind, spec.gamma, spec.marked, sparse)


def _hamiltonian(g: Graph, kind: str, gamma: float, marked: int | None, sparse: bool = False):
    # gamma == 0 is allowed internally (frozen-walk limit used by scans and the CLI)
    if sparse:
        H = (-gamma) * g.adjacency_sparse.astype(float)
        diag = np.zeros(g.n)
        if kind == "laplacian":
            diag += gamma * g.degrees
        if marked is not None:
            diag[marked] -= 1.0
        return (H + sp.diags(diag)).tocsr()
    X = laplacian(g) if kind == "laplacian" else adjacency(g)
    H = -gamma * X
    if marked is not None:
        H[marked, marked] -= 1.0
    return H
