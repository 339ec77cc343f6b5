"""Permutations, generator sets and orbit partitions.

Permutations act on vertex indices: ``p.image[i]`` is where ``i`` goes.
Composition follows function notation, ``(p * q)(i) == p(q(i))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InvalidParameterError, ParseError

FULL = "full_automorphism"
USER = "user_supplied"


def _check_bijection(arr: np.ndarray, n: int) -> None:
    if arr.shape[-1] != n:
        raise InvalidParameterError(f"permutation has degree {arr.shape[-1]}, expected {n}")
    ok = np.sort(arr, axis=-1) == np.arange(n)
    if not np.all(ok):
        raise InvalidParameterError("image is not a bijection on 0..n-1")


class Permutation:
    __slots__ = ("image",)

    def __init__(self, image: Iterable[int]):
        image = tuple(int(x) for x in image)
        _check_bijection(np.asarray(image, dtype=np.intp), len(image))
        self.image = image

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        img = list(range(n))
        img[i], img[j] = j, i
        return cls(img)

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        img = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[a] = b
        return cls(img)

    @property
    def degree(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise InvalidParameterError("degree mismatch")
        return Permutation(self.image[j] for j in other.image)

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.image))

    def moved_points(self) -> list[int]:
        return [i for i, j in enumerate(self.image) if i != j]

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for i in range(self.degree):
            if i in seen or self.image[i] == i:
                continue
            cyc = [i]
            j = self.image[i]
            while j != i:
                seen.add(j)
                cyc.append(j)
                j = self.image[j]
            out.append(tuple(cyc))
        return out

    def matrix(self) -> np.ndarray:
        """The representation D(g): a permutation matrix with ``D[g(i), i] = 1``."""
        D = np.zeros((self.degree, self.degree))
        D[list(self.image), range(self.degree)] = 1.0
        return D

    def to_line(self) -> str:
        return " ".join(map(str, self.image))

    @classmethod
    def from_line(cls, line: str) -> "Permutation":
        try:
            return cls(int(x) for x in line.split())
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.image == other.image

    def __hash__(self):
        return hash(self.image)

    def __repr__(self):
        cyc = "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles())
        return f"Permutation<{self.degree}>{cyc or '()'}"


class GeneratorSet:
    """A list of non-identity, pairwise distinct permutations of one degree.

    Generators live in a read-only ``(k, n)`` integer array; :attr:`gens`
    wraps them as :class:`Permutation` objects on demand.
    """

    def __init__(self, n: int, images, claims: str = USER):
        arr = np.asarray(images, dtype=np.intp).reshape(-1, n) if n else np.zeros((0, 0), np.intp)
        if len(arr):
            _check_bijection(arr, n)
            keep = np.any(arr != np.arange(n), axis=1)
            arr = arr[keep]
            _, first = np.unique(arr, axis=0, return_index=True)
            arr = arr[np.sort(first)]
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.n = n
        self.images = arr
        self.claims = claims

    @classmethod
    def from_perms(cls, n: int, perms: Iterable[Permutation], claims: str = USER) -> "GeneratorSet":
        rows = [p.image for p in perms]
        for p in rows:
            if len(p) != n:
                raise InvalidParameterError(f"generator of degree {len(p)} in a set of degree {n}")
        return cls(n, np.array(rows, dtype=np.intp).reshape(-1, n), claims)

    @property
    def gens(self) -> list[Permutation]:
        return [Permutation(row) for row in self.images]

    def __len__(self):
        return len(self.images)

    @property
    def stabilized_point(self) -> int | None:
        if self.claims.startswith("stabilizer_of(") and self.claims.endswith(")"):
            return int(self.claims[len("stabilizer_of("):-1])
        return None

    def to_text(self) -> str:
        lines = [f"{self.n} {len(self)} {self.claims}"]
        lines.extend(" ".join(map(str, row)) for row in self.images)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GeneratorSet":
        lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
        lines = [(i, ln) for i, ln in lines if ln]
        if not lines:
            raise ParseError("empty generator file", 1)
        lineno, header = lines[0]
        parts = header.split()
        if len(parts) != 3:
            raise ParseError("header must be 'n k claims'", lineno)
        try:
            n, k = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError("header must be 'n k claims'", lineno) from None
        if len(lines) - 1 != k:
            raise ParseError(f"header declares {k} generators, found {len(lines) - 1}", lineno)
        rows = []
        for lineno, text in lines[1:]:
            try:
                row = [int(x) for x in text.split()]
            except ValueError:
                raise ParseError("non-integer token", lineno) from None
            if len(row) != n or sorted(row) != list(range(n)):
                raise ParseError("not a permutation of 0..n-1", lineno)
            rows.append(row)
        return cls(n, np.array(rows, dtype=np.intp).reshape(-1, n), parts[2])


@dataclass(frozen=True)
class OrbitPartition:
    """Classes sorted by smallest member, members ascending within a class."""

    classes: tuple[tuple[int, ...], ...]
    class_of: tuple[int, ...]

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "OrbitPartition":
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(v)
        classes = sorted((tuple(g) for g in groups.values()), key=lambda c: c[0])
        class_of = [0] * len(labels)
        for a, c in enumerate(classes):
            for v in c:
                class_of[v] = a
        return cls(tuple(classes), tuple(class_of))

    @property
    def n(self) -> int:
        return len(self.class_of)

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.classes]

    def __len__(self):
        return len(self.classes)


def orbits(gs: GeneratorSet) -> OrbitPartition:
    """Connected components of the Schreier graph of ``gs`` on the vertices."""
    n = gs.n
    src = np.tile(np.arange(n), len(gs))
    dst = gs.images.ravel()
    moved = src != dst
    adj = coo_matrix((np.ones(int(moved.sum()), dtype=np.int8), (src[moved], dst[moved])), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="weak")
    return OrbitPartition.from_labels(labels)


def orbit_of(point: int, gs: GeneratorSet) -> list[int]:
    seen = {point}
    frontier = [point]
    while frontier:
        nxt = np.unique(gs.images[:, frontier])
        frontier = [int(x) for x in nxt if x not in seen]
        seen.update(frontier)
    return sorted(seen)


def project_trivial(i: int, gs: GeneratorSet) -> np.ndarray:
    """Trivial-representation projector applied to ``|i>``, normalized.

    The group average of ``g|i>`` is uniform over the orbit of ``i``, so the
    orbit is closed under the generators instead of summing over the group.
    """
    if not 0 <= i < gs.n:
        raise InvalidParameterError(f"vertex {i} out of range")
    members = orbit_of(i, gs)
    v = np.zeros(gs.n)
    v[members] = 1.0 / np.sqrt(len(members))
    return v


def _transversal(point: int, images: np.ndarray, n: int):
    """BFS Schreier tree: orbit list plus ``reps[k]`` mapping point -> orbit[k]."""
    orbit = [point]
    index = {point: 0}
    reps = [np.arange(n)]
    pos = 0
    while pos < len(orbit):
        x = orbit[pos]
        u = reps[pos]
        for g in images:
            y = int(g[x])
            if y not in index:
                index[y] = len(orbit)
                orbit.append(y)
                reps.append(g[u])
        pos += 1
    return orbit, index, np.array(reps)


def _unique_rows(rows: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # hash-based dedup; exact check on the hash groups, np.unique fallback on collision
    keys = rows @ weights  # int64 arithmetic wraps
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    if np.array_equal(rows, rows[first][inverse.reshape(-1)]):
        return rows[first]
    return np.unique(rows, axis=0)


def stabilizer(gs: GeneratorSet, w: int) -> GeneratorSet:
    """Schreier generators for the point stabilizer of ``w``.

    For every orbit point ``x`` and generator ``g`` the element
    ``u_{g(x)}^{-1} g u_x`` fixes ``w``; by Schreier's lemma these generate
    the stabilizer. Identities and duplicates are removed, nothing else.
    """
    if gs.claims not in (FULL, USER):
        raise InvalidParameterError(f"stabilizer needs a full or user-supplied group, got {gs.claims!r}")
    n = gs.n
    if not 0 <= w < n:
        raise InvalidParameterError(f"vertex {w} out of range for degree {n}")
    claims = f"stabilizer_of({w})"
    if len(gs) == 0:
        return GeneratorSet(n, np.zeros((0, n), np.intp), claims)
    orbit, index, reps = _transversal(w, gs.images, n)
    inv = np.empty_like(reps)
    rows = np.arange(len(reps))[:, None]
    inv[rows, reps] = np.arange(n)
    # flat int32 gathers: row x of a batch is u_{g(x)}^{-1} o g o u_x
    inv_flat = inv.astype(np.int32).ravel()
    reps32 = reps.astype(np.int32)
    pos = np.full(n, -1, dtype=np.int32)
    pos[orbit] = np.arange(len(orbit), dtype=np.int32)
    offsets_of = pos * np.int32(n)
    orbit_arr = np.array(orbit)
    identity = np.arange(n, dtype=np.int32)
    weights = np.random.default_rng(0).integers(1, 2**62, size=n, dtype=np.int64)
    found = []
    seen = set()
    for g in gs.images:
        g32 = g.astype(np.int32)
        idx = np.take(g32, reps32)
        idx += offsets_of[g[orbit_arr]][:, None]
        batch = np.take(inv_flat, idx)
        batch = batch[np.any(batch != identity, axis=1)]
        if not len(batch):
            continue
        batch = _unique_rows(batch, weights)
        for row in batch:
            key = row.tobytes()
            if key not in seen:
                seen.add(key)
                found.append(row)
    images = np.array(found, dtype=np.intp).reshape(-1, n)
    # canonical order independent of batch traversal
    if len(images):
        images = images[np.lexsort(images.T[::-1])]
    return GeneratorSet(n, images, claims)
