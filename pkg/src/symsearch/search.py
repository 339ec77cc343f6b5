"""Search experiments: predicted schedules, staged runs, gamma scans, cross-checks.

Reduced runs use the Jacobi spectral synthesis in the orbit basis. The
full-space oracle is deliberately a different route: the sparse
Hamiltonian is exponentiated with ``scipy.sparse.linalg.expm_multiply``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import expm_multiply

from .dynamics import JACOBI_TOL, EvolutionTrace, eigendecompose, evolve, evolve_states, spectral_gap
from .errors import InvalidParameterError, ResourceLimitError, UnsupportedFamilyError
from .graph import MATRIX_KINDS, Graph, _hamiltonian
from .reduction import ReducedBasis, project_state, reduce
from .symmetry import family_generators, find_automorphisms, orbits, stabilizer
from .symmetry.perm import GeneratorSet

DEFAULT_STEPS = 1001
HORIZON_FACTOR = 1.5
FULL_CAP = 2048


def uniform_state(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return np.full(n, 1.0 / math.sqrt(n))


@dataclass(frozen=True)
class Schedule:
    """Ordered ``(gamma, duration)`` stages.

    ``gamma == 0`` is accepted: it freezes the walk and leaves only the
    oracle phase, which is a useful control run.
    """

    stages: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.stages:
            raise InvalidParameterError("schedule needs at least one stage")
        for gamma, duration in self.stages:
            if not (math.isfinite(gamma) and gamma >= 0):
                raise InvalidParameterError(f"stage gamma must be finite and >= 0, got {gamma}")
            if not (math.isfinite(duration) and duration >= 0):
                raise InvalidParameterError(f"stage duration must be finite and >= 0, got {duration}")

    @classmethod
    def of(cls, *stages) -> "Schedule":
        return cls(tuple((float(g), float(t)) for g, t in stages))

    @property
    def total_time(self) -> float:
        return sum(t for _, t in self.stages)


def predicted_schedule(family: str, **params) -> Schedule:
    """Jumping rates and stage durations from the asymptotic analyses.

    complete (``n``): one stage; balanced_tree (``M``, height 2): two
    stages; truncated_simplex (``M``, order 2): three stages.
    """
    pi = math.pi
    if family == "complete":
        N = params["n"]
        return Schedule.of((1.0 / N, pi * math.sqrt(N) / 2))
    if family == "balanced_tree":
        if params.get("r", 2) != 2:
            raise InvalidParameterError("predicted schedule exists only for height-2 trees")
        M = params["M"]
        return Schedule.of((2.0, pi * M ** 1.5 / 4), (1.0, pi * M ** 0.5 / 2))
    if family == "truncated_simplex":
        if params.get("order", 2) != 2:
            raise InvalidParameterError("predicted schedule exists only for second-order simplex lattices")
        M = params["M"]
        return Schedule.of((3.0 / M, pi * M ** 2.5 / 6), (2.0 / M, pi * M ** 1.5 / 4),
                           (1.0 / M, pi * M ** 0.5 / 2))
    raise InvalidParameterError(f"no predicted schedule for family {family!r}")


def predicted_schedule_for(g: Graph) -> Schedule:
    return predicted_schedule(g.family, **g.params)


def default_matrix_kind(g: Graph) -> str:
    return "laplacian" if g.family == "balanced_tree" or not g.is_regular() else "adjacency"


def outer_vertices(g: Graph) -> list[int]:
    """Simplex vertices whose external edge joins two different top-level blocks."""
    if g.family != "truncated_simplex":
        raise UnsupportedFamilyError("outer vertices are defined for truncated simplex lattices")
    block = g.params["M"] ** g.params["order"]
    if g.params["order"] == 0:
        return list(range(g.n))
    out = set()
    for u, v in g.edges:
        if u // block != v // block:
            out.update((u, v))
    return sorted(out)


def default_marked(g: Graph) -> int:
    """complete -> 0, tree -> leaf 0, simplex -> smallest outer vertex, custom -> 0."""
    if g.family == "truncated_simplex":
        return outer_vertices(g)[0]
    return 0


def symmetry_generators(g: Graph, source: str = "auto", *, cap: int = 512,
                        timeout: float | None = None) -> GeneratorSet:
    """Aut(g) generators from the family closed form or the generic search."""
    if source not in ("auto", "family", "search"):
        raise InvalidParameterError(f"unknown symmetry source {source!r}")
    if source == "family" or (source == "auto" and g.family in ("complete", "balanced_tree")):
        return family_generators(g)
    return find_automorphisms(g, cap=cap, timeout=timeout)


def orbit_basis(g: Graph, w: int | None, gens: GeneratorSet | None = None,
                source: str = "auto") -> ReducedBasis:
    """Stabilizer-of-``w`` orbit basis (or plain Aut orbits when ``w`` is None)."""
    gs = gens if gens is not None else symmetry_generators(g, source)
    if w is not None:
        gs = stabilizer(gs, w)
    return ReducedBasis.from_partition(orbits(gs), w, g.labels)


@dataclass
class StageReport:
    gamma: float
    duration: float
    trace: EvolutionTrace  # probe trace over [0, horizon]
    gap: float | None
    predicted_peak: float
    measured_peak: float  # argmax of the marked-vertex probability on the probe grid
    peak_success: float
    end_success: float


@dataclass
class SearchReport:
    final_success: float
    stages: list[StageReport]
    basis_kind: str
    labels: tuple[str, ...]
    sizes: list[int]
    final_state: np.ndarray
    deviation: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def gaps(self) -> list[float | None]:
        return [s.gap for s in self.stages]


def _check_instance(g: Graph, kind: str, w: int) -> None:
    if kind not in MATRIX_KINDS:
        raise InvalidParameterError(f"matrix kind must be one of {MATRIX_KINDS}")
    if not 0 <= w < g.n:
        raise InvalidParameterError(f"marked vertex {w} out of range for n={g.n}")


def _grid(duration: float, steps: int, factor: float) -> np.ndarray:
    if steps < 2:
        raise InvalidParameterError("time grid needs at least 2 points")
    return np.linspace(0.0, factor * duration, steps)


def run_schedule(g: Graph, kind: str, w: int, sched: Schedule, basis: ReducedBasis | None = None, *,
                 engine: str = "spectral", steps: int = DEFAULT_STEPS,
                 horizon_factor: float = HORIZON_FACTOR, full_cap: int = FULL_CAP,
                 eigen_tol: float = JACOBI_TOL) -> SearchReport:
    """Evolve ``|s>`` through the stages, handing the state on between them.

    With a basis, every stage is simulated in the orbit basis. Without one
    the full space is used: ``engine="spectral"`` diagonalizes the full
    matrix with the Jacobi solver, ``engine="expm"`` applies the sparse
    matrix exponential (the independent oracle route).
    """
    _check_instance(g, kind, w)
    if engine not in ("spectral", "expm"):
        raise InvalidParameterError(f"unknown engine {engine!r}")
    if basis is None and g.n > full_cap:
        raise ResourceLimitError(f"full-space simulation capped at {full_cap} vertices")
    if basis is not None:
        if basis.n != g.n:
            raise InvalidParameterError("basis does not match the graph")
        target = int(basis.class_index[w])
        if basis.sizes[target] != 1:
            raise InvalidParameterError("marked vertex must be a singleton class of the basis")
        psi = project_state(uniform_state(g.n), basis)
        labels, sizes, basis_kind = basis.labels, [int(s) for s in basis.sizes], "reduced"
    else:
        target = w
        psi = uniform_state(g.n).astype(complex)
        labels, sizes, basis_kind = tuple(g.label(v) for v in range(g.n)), [1] * g.n, "full"

    reports = []
    for gamma, duration in sched.stages:
        times = _grid(duration, steps, horizon_factor)
        if basis is not None:
            H = reduce(_hamiltonian(g, kind, gamma, w), basis).matrix
        else:
            H = _hamiltonian(g, kind, gamma, w, sparse=(engine == "expm"))
        if engine == "spectral" or basis is not None:
            spec = eigendecompose(H, tol=eigen_tol)
            trace = evolve(spec, psi, times, basis_kind=basis_kind, sizes=sizes, labels=labels)
            psi_next = evolve_states(spec, psi, [duration])[0]
            gap = spectral_gap(spec) if spec.dim > 1 else None
        else:
            if times[-1] > 0:
                amps = expm_multiply(-1j * H, psi, start=0.0, stop=times[-1], num=steps, endpoint=True)
            else:
                amps = np.tile(psi, (steps, 1))
            trace = EvolutionTrace(times, amps.real.copy(), amps.imag.copy(), "full", np.asarray(sizes), labels)
            psi_next = expm_multiply(-1j * duration * H, psi)
            evals = scipy.linalg.eigvalsh(H.toarray(), subset_by_index=[0, 1]) if g.n > 1 else None
            gap = None if evals is None else float(evals[1] - evals[0])
        p = trace.probabilities[:, target]
        k = int(np.argmax(p))
        end = float(abs(psi_next[target]) ** 2)
        reports.append(StageReport(gamma, duration, trace, gap, duration, float(times[k]), float(p[k]), end))
        psi = psi_next
    final = float(min(max(abs(psi[target]) ** 2, 0.0), 1.0))
    return SearchReport(final, reports, basis_kind, labels, sizes, psi,
                        meta={"matrix_kind": kind, "marked": w, "n": g.n})


@dataclass(frozen=True)
class GammaRecord:
    gamma: float
    gap: float | None
    max_success: float
    argmax_time: float


def default_gamma_grid(gamma0: float, points: int = 41) -> np.ndarray:
    return gamma0 * np.logspace(-1.0, 1.0, points)


def scan_gamma(g: Graph, w: int, gammas, horizon: float, *, kind: str | None = None,
               basis: ReducedBasis | None = None, steps: int = DEFAULT_STEPS,
               eigen_tol: float = JACOBI_TOL) -> list[GammaRecord]:
    """Gap and best single-stage success over ``[0, horizon]`` for each gamma."""
    gammas = np.asarray(sorted(float(x) for x in gammas))
    if not len(gammas):
        raise InvalidParameterError("gamma grid is empty")
    kind = kind or default_matrix_kind(g)
    _check_instance(g, kind, w)
    basis = basis if basis is not None else orbit_basis(g, w)
    target = int(basis.class_index[w])
    psi = project_state(uniform_state(g.n), basis)
    times = _grid(horizon, steps, 1.0)
    out = []
    for gamma in gammas:
        if gamma < 0:
            raise InvalidParameterError("gamma must be >= 0")
        spec = eigendecompose(reduce(_hamiltonian(g, kind, gamma, w), basis).matrix, tol=eigen_tol)
        p = np.abs(evolve_states(spec, psi, times)[:, target]) ** 2
        k = int(np.argmax(p))
        gap = spectral_gap(spec) if spec.dim > 1 else None
        out.append(GammaRecord(float(gamma), gap, float(p[k]), float(times[k])))
    return out


@dataclass
class VerificationReport:
    max_deviation: float
    tol: float
    reduced: SearchReport
    full: SearchReport

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def verify_reduced_vs_full(g: Graph, w: int, sched: Schedule, tol: float = 1e-8, *,
                           kind: str | None = None, basis: ReducedBasis | None = None,
                           steps: int = DEFAULT_STEPS, cap: int = FULL_CAP,
                           eigen_tol: float = JACOBI_TOL) -> VerificationReport:
    """Max over stages, times and orbit states of |project(full) - reduced|."""
    if g.n > cap:
        raise ResourceLimitError(f"full-space cross-check capped at {cap} vertices")
    kind = kind or default_matrix_kind(g)
    basis = basis if basis is not None else orbit_basis(g, w)
    red = run_schedule(g, kind, w, sched, basis, steps=steps, eigen_tol=eigen_tol)
    full = run_schedule(g, kind, w, sched, None, engine="expm", steps=steps, full_cap=cap)
    dev = 0.0
    for rs, fs in zip(red.stages, full.stages):
        projected = project_state(fs.trace.amplitudes, basis)
        dev = max(dev, float(np.max(np.abs(projected - rs.trace.amplitudes))))
    dev = max(dev, float(np.max(np.abs(project_state(full.final_state, basis) - red.final_state))))
    red.deviation = dev
    return VerificationReport(dev, tol, red, full)
