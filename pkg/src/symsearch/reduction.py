"""Orbit-basis reduction of search Hamiltonians, plus the Krylov comparison basis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameterError
from .graph import HamiltonianSpec
from .symmetry.perm import OrbitPartition

LANCZOS_TOL = 1e-10


@dataclass(frozen=True)
class ReducedBasis:
    """Uniform unit vectors over orbit classes, in reduction order.

    The marked vertex's class (when given) comes first; the remaining classes
    keep the partition's smallest-member order.
    """

    partition: OrbitPartition
    classes: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    marked: int | None = None

    @classmethod
    def from_partition(cls, partition: OrbitPartition, marked: int | None = None,
                       vertex_labels: Sequence[str] | None = None) -> "ReducedBasis":
        classes = list(partition.classes)
        if marked is not None:
            a = partition.class_of[marked]
            if len(classes[a]) != 1:
                raise InvalidParameterError(
                    f"marked vertex {marked} is not a singleton orbit; the partition ignores the oracle")
            classes.insert(0, classes.pop(a))
        name = (lambda v: str(v)) if vertex_labels is None else (lambda v: vertex_labels[v])
        return cls(partition, tuple(classes), tuple(name(c[0]) for c in classes), marked)

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def dim(self) -> int:
        return len(self.classes)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.classes])

    @property
    def class_index(self) -> np.ndarray:
        """Reduced coordinate index of every vertex."""
        idx = np.empty(self.n, dtype=np.intp)
        for a, c in enumerate(self.classes):
            idx[list(c)] = a
        return idx

    def matrix(self) -> np.ndarray:
        """The ``n x dim`` isometry whose columns are the orbit states."""
        B = np.zeros((self.n, self.dim))
        for a, c in enumerate(self.classes):
            B[list(c), a] = 1.0 / np.sqrt(len(c))
        return B

    def state(self, a: int) -> np.ndarray:
        return self.matrix()[:, a]


@dataclass(frozen=True)
class ReducedHamiltonian:
    matrix: np.ndarray
    basis: ReducedBasis
    spec: HamiltonianSpec | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_dim(H, basis: ReducedBasis) -> None:
    if H.shape != (basis.n, basis.n):
        raise InvalidParameterError(f"matrix shape {H.shape} does not match basis over {basis.n} vertices")


def class_sums(H, basis: ReducedBasis) -> np.ndarray:
    """Unscaled block sums ``sum_{i in V_a, j in V_b} H_ij`` over the nonzero entries."""
    _check_dim(H, basis)
    coo = sp.coo_matrix(H)
    idx = basis.class_index
    a, b = idx[coo.row], idx[coo.col]
    upper = a <= b
    k = basis.dim
    flat = np.bincount(a[upper] * k + b[upper], weights=coo.data[upper], minlength=k * k)
    S = flat.reshape(k, k)
    # build the lower triangle from the upper one so the result is exactly symmetric
    S = np.triu(S) + np.triu(S, 1).T
    return S


def reduce(H, basis: ReducedBasis, spec: HamiltonianSpec | None = None) -> ReducedHamiltonian:
    """Matrix of ``H`` in the orbit basis: block sums over ``sqrt(|V_a| |V_b|)``."""
    S = class_sums(H, basis)
    root = np.sqrt(basis.sizes)
    R = S / np.outer(root, root)
    return ReducedHamiltonian(R, basis, spec)


def invariance_residual(H, basis: ReducedBasis) -> float:
    """Max-norm of ``(I - P) H P`` with ``P`` the projector onto the orbit span."""
    _check_dim(H, basis)
    B = basis.matrix()
    HB = np.asarray(H @ B)
    leak = HB - B @ (B.T @ HB)
    # (I - P) H P = leak @ B.T, and each column of B.T is a scaled unit vector
    return float(np.max(np.abs(leak) / np.sqrt(basis.sizes), initial=0.0))


def project_state(v: np.ndarray, basis: ReducedBasis) -> np.ndarray:
    """Coordinates ``<eq_a|v>``; works on a single state or on rows of a trace."""
    v = np.asarray(v)
    if v.shape[-1] != basis.n:
        raise InvalidParameterError(f"state has {v.shape[-1]} entries, basis expects {basis.n}")
    out = np.zeros(v.shape[:-1] + (basis.dim,), dtype=np.result_type(v, float))
    for a, c in enumerate(basis.classes):
        out[..., a] = v[..., list(c)].sum(axis=-1)
    return out / np.sqrt(basis.sizes)


def lift(u: np.ndarray, basis: ReducedBasis) -> np.ndarray:
    u = np.asarray(u)
    if u.shape[-1] != basis.dim:
        raise InvalidParameterError(f"reduced state has {u.shape[-1]} entries, basis has {basis.dim}")
    scaled = u / np.sqrt(basis.sizes)
    return scaled[..., basis.class_index]


def lanczos_basis(H, start: np.ndarray, k: int, tol: float = LANCZOS_TOL) -> list[np.ndarray]:
    """Orthonormal Krylov vectors from ``start`` by Gram-Schmidt on ``H^j start``.

    Each new direction is reorthogonalized twice against all previous ones.
    The basis stops early when the new residual has norm below ``tol``
    relative to ``|H v|``.
    """
    start = np.asarray(start, dtype=float if np.isrealobj(start) else complex)
    if H.shape[0] != start.shape[0] or k > H.shape[0] or k < 1:
        raise InvalidParameterError("need 1 <= k <= dim and a start vector of matching size")
    if abs(np.linalg.norm(start) - 1.0) > 1e-10:
        raise InvalidParameterError("start vector must be normalized")
    vecs = [start]
    while len(vecs) < k:
        w = np.asarray(H @ vecs[-1]).ravel().astype(start.dtype)
        scale = max(np.linalg.norm(w), 1.0)
        for _ in range(2):
            for v in vecs:
                w = w - np.vdot(v, w) * v
        nrm = np.linalg.norm(w)
        if nrm <= tol * scale:
            break
        vecs.append(w / nrm)
    return vecs
