"""Spectral decomposition and exact time evolution of real symmetric Hamiltonians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParameterError, NumericFailureError

JACOBI_TOL = 1e-14
MAX_SWEEPS = 50
NORM_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]
    sweeps: int = 0

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Circle-method schedule: m-1 rounds of m/2 disjoint pairs covering all pairs."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p = np.array([min(players[i], players[m - 1 - i]) for i in range(m // 2)])
        q = np.array([max(players[i], players[m - 1 - i]) for i in range(m // 2)])
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def eigendecompose(H, *, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """Cyclic Jacobi diagonalization with a fixed round-robin rotation order.

    Every round annihilates a set of disjoint off-diagonal pairs at once
    (those rotations commute), so a sweep is ``n-1`` vectorized rounds.
    Converged once the off-diagonal Frobenius norm is at most
    ``tol * ||H||_F``; raises :class:`NumericFailureError` after
    ``max_sweeps`` sweeps.
    """
    A = np.array(H, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidParameterError("matrix must be square")
    if not np.array_equal(A, A.T):
        raise InvalidParameterError("matrix must be exactly symmetric")
    n = A.shape[0]
    V = np.eye(n)
    target = tol * np.linalg.norm(A)
    m = n + (n % 2)
    rounds = [(p[q < n], q[q < n]) for p, q in _round_robin(m)] if n > 1 else []

    def off_norm():
        off = A - np.diag(np.diag(A))
        return np.linalg.norm(off)

    sweeps = 0
    while off_norm() > target:
        if sweeps == max_sweeps:
            raise NumericFailureError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p, q in rounds:
            apq = A[p, q]
            live = apq != 0.0
            if not live.any():
                continue
            p, q, apq = p[live], q[live], apq[live]
            app, aqq = A[p, p], A[q, q]
            # a subnormal apq sends theta to inf, which correctly gives t = 0
            with np.errstate(over="ignore", divide="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            Ap, Aq = A[:, p], A[:, q]
            A[:, p], A[:, q] = Ap * c - Aq * s, Ap * s + Aq * c
            Ap, Aq = A[p, :], A[q, :]
            A[p, :], A[q, :] = c[:, None] * Ap - s[:, None] * Aq, s[:, None] * Ap + c[:, None] * Aq
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p], V[:, q]
            V[:, p], V[:, q] = Vp * c - Vq * s, Vp * s + Vq * c
        # the two-sided update rounds differently above and below the diagonal
        A = 0.5 * (A + A.T)

    evals = np.diag(A).copy()
    order = np.argsort(evals, kind="stable")
    evals, V = evals[order], V[:, order]
    # deterministic sign: largest-magnitude component positive
    pivots = np.argmax(np.abs(V), axis=0)
    V = V * np.where(V[pivots, np.arange(n)] < 0, -1.0, 1.0)
    return Spectrum(evals, V, sweeps)


@dataclass(frozen=True)
class EvolutionTrace:
    """Amplitudes on a time grid, kept as separate real and imaginary planes.

    ``real[t, j]`` / ``imag[t, j]`` belong to basis element ``j`` at
    ``times[t]``. For a reduced trace ``sizes`` holds the class sizes.
    """

    times: np.ndarray
    real: np.ndarray
    imag: np.ndarray
    basis_kind: str = "full"
    sizes: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    @property
    def amplitudes(self) -> np.ndarray:
        return self.real + 1j * self.imag

    @property
    def probabilities(self) -> np.ndarray:
        return self.real ** 2 + self.imag ** 2

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.probabilities.sum(axis=1))

    def final_state(self) -> np.ndarray:
        return self.amplitudes[-1]


def _check_normalized(psi: np.ndarray, what: str = "state") -> None:
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise InvalidParameterError(f"{what} must be normalized (norm {np.linalg.norm(psi):.3g})")


def evolve_states(spec: Spectrum, psi0: np.ndarray, times) -> np.ndarray:
    """``exp(-i H t) psi0`` for each t, as a complex ``(len(times), dim)`` array."""
    psi0 = np.asarray(psi0)
    if psi0.shape != (spec.dim,):
        raise InvalidParameterError(f"state has shape {psi0.shape}, expected ({spec.dim},)")
    _check_normalized(psi0)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not np.all(np.isfinite(times)):
        raise InvalidParameterError("times must be finite")
    V = spec.eigenvectors
    coeff = V.T @ psi0
    phases = np.exp(-1j * np.outer(times, spec.eigenvalues))
    out = (phases * coeff) @ V.T
    out[times == 0] = psi0  # exact at t = 0 rather than V V^T psi0
    return out


def evolve(spec: Spectrum, psi0: np.ndarray, times, *, basis_kind: str = "full",
           sizes=None, labels=None) -> EvolutionTrace:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    amps = evolve_states(spec, psi0, times)
    return EvolutionTrace(times, amps.real.copy(), amps.imag.copy(), basis_kind,
                          None if sizes is None else np.asarray(sizes), labels)


def success_probability(trace: EvolutionTrace, target: int, *, class_probability: bool = False) -> np.ndarray:
    """``|amplitude(target, t)|^2`` along the trace.

    In a reduced trace a class of size > 1 only has a class probability
    (the summed probability of its members); ask for it with
    ``class_probability=True``.
    """
    dim = trace.real.shape[1]
    if not 0 <= target < dim:
        raise InvalidParameterError(f"target {target} out of range for dimension {dim}")
    if trace.basis_kind == "reduced" and not class_probability:
        if trace.sizes is None or trace.sizes[target] != 1:
            raise InvalidParameterError(
                "target class has more than one vertex; pass class_probability=True for its class probability")
    return trace.real[:, target] ** 2 + trace.imag[:, target] ** 2


def spectral_gap(spec: Spectrum, levels: tuple[int, int] = (0, 1)) -> float:
    """``E_j - E_i`` for ``levels=(i, j)``; the default is the ground-state gap."""
    i, j = levels
    if spec.dim < 2:
        raise InvalidParameterError("gap needs at least two levels")
    if not (0 <= i < spec.dim and 0 <= j < spec.dim):
        raise InvalidParameterError(f"levels {levels} out of range")
    return float(spec.eigenvalues[j] - spec.eigenvalues[i])


def overlap_table(spec: Spectrum, states: Mapping[str, np.ndarray] | Sequence[tuple[str, np.ndarray]]
                  ) -> dict[str, np.ndarray]:
    """Row per labelled state: ``|<state|v_k>|`` for every eigenvector ``v_k``."""
    items = states.items() if isinstance(states, Mapping) else states
    table = {}
    for label, psi in items:
        psi = np.asarray(psi)
        _check_normalized(psi, f"state {label!r}")
        table[label] = np.abs(spec.eigenvectors.T @ psi.conj())
    return table
