"""Command-line front end: build, symmetry, reduce, evolve, search, scan, verify, lanczos.

Exit codes: 0 success, 1 configuration or parse error, 2 numeric failure
(including size caps and search timeouts), 3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np
import scipy.linalg

from . import io as sio
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .dynamics import eigendecompose, evolve, overlap_table, spectral_gap
from .errors import (
    InvalidParameterError,
    NumericFailureError,
    ParseError,
    PartialResultError,
    ResourceLimitError,
)
from .graph import (
    Graph,
    _hamiltonian,
    build_balanced_tree,
    build_complete,
    build_truncated_simplex,
    dump_edge_list,
    load_edge_list,
)
from .reduction import ReducedBasis, invariance_residual, lanczos_basis, project_state, reduce
from .search import (
    FULL_CAP,
    Schedule,
    default_gamma_grid,
    default_marked,
    default_matrix_kind,
    predicted_schedule_for,
    run_schedule,
    scan_gamma,
    symmetry_generators,
    uniform_state,
    verify_reduced_vs_full,
)
from .symmetry import GeneratorSet, group_order, is_automorphism, orbits, stabilizer

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
ORDER_DEGREE_CAP = 64  # group order is reported only up to this many vertices
RESIDUAL_TOL = 1e-12
ORBIT_TOL = 1e-10
UNITARITY_TOL = 1e-9
ORBIT_SAMPLES = 100


class VerificationFailed(Exception):
    pass


class Context:
    """Resolved pieces of a run, built lazily from the config."""

    def __init__(self, cfg: RunConfig, out=sys.stdout):
        self.cfg = cfg
        self.out = out
        self._graph = None
        self._gens = None

    def say(self, line: str) -> None:
        print(line, file=self.out)

    @property
    def graph(self) -> Graph:
        if self._graph is None:
            cfg = self.cfg
            if cfg.edges is not None:
                try:
                    text = Path(cfg.edges).read_text()
                except OSError as exc:
                    raise ConfigError(f"cannot read edge list {cfg.edges}: {exc.strerror}") from None
                self._graph = load_edge_list(text)
            else:
                p = cfg.params
                if cfg.family == "complete":
                    self._graph = build_complete(p["n"])
                elif cfg.family == "balanced_tree":
                    self._graph = build_balanced_tree(p["r"], p["M"])
                else:
                    self._graph = build_truncated_simplex(p["order"], p["M"])
        return self._graph

    @property
    def marked(self) -> int:
        w = self.cfg.marked if self.cfg.marked is not None else default_marked(self.graph)
        if isinstance(w, bool) or not isinstance(w, int) or not 0 <= w < self.graph.n:
            raise ConfigError(f"marked vertex {w!r} out of range for n={self.graph.n}")
        return w

    @property
    def kind(self) -> str:
        return self.cfg.matrix_kind or default_matrix_kind(self.graph)

    @property
    def generators(self) -> GeneratorSet:
        if self._gens is None:
            cfg, g = self.cfg, self.graph
            if cfg.symmetry == "file":
                try:
                    text = Path(cfg.generators).read_text()
                except OSError as exc:
                    raise ConfigError(f"cannot read generators {cfg.generators}: {exc.strerror}") from None
                gs = GeneratorSet.from_text(text)
                if gs.n != g.n:
                    raise ConfigError(f"generator degree {gs.n} does not match n={g.n}")
                bad = [k for k, row in enumerate(gs.images) if not is_automorphism(g, row)]
                if bad:
                    raise ConfigError(f"generator {bad[0]} in {cfg.generators} is not an automorphism")
                # the file may hold a stabilizer already; the stabilizer step needs the full claim
                if gs.stabilized_point is not None:
                    gs = GeneratorSet(gs.n, gs.images, "user_supplied")
                self._gens = gs
            else:
                self._gens = symmetry_generators(g, cfg.symmetry, cap=cfg.search_cap,
                                                 timeout=cfg.search_timeout)
        return self._gens

    def basis(self) -> ReducedBasis:
        g = self.graph
        if self.cfg.basis == "unmarked":
            return ReducedBasis.from_partition(orbits(self.generators), None, g.labels)
        w = self.marked
        return ReducedBasis.from_partition(orbits(stabilizer(self.generators, w)), w, g.labels)

    def predicted(self) -> Schedule | None:
        try:
            return predicted_schedule_for(self.graph)
        except InvalidParameterError:
            return None

    def schedule(self) -> Schedule:
        stages = self.cfg.stages()
        if stages is not None:
            return Schedule.of(*stages)
        sched = self.predicted()
        if sched is None:
            raise ConfigError(f"no predicted schedule for family {self.graph.family!r}; give explicit stages")
        return sched

    def gamma(self) -> float:
        if self.cfg.gamma is not None:
            gamma = float(self.cfg.gamma)
            if not (math.isfinite(gamma) and gamma >= 0):
                raise ConfigError("gamma must be finite and >= 0")
            return gamma
        return self.schedule().stages[0][0]

    def horizon(self, gamma: float, gap: float | None) -> float:
        """t_max, else 1.5x a predicted duration at this gamma, else 10 pi / gap."""
        if self.cfg.t_max is not None:
            return float(self.cfg.t_max)
        sched = self.predicted() if self.cfg.stages() is None else Schedule.of(*self.cfg.stages())
        if sched is not None:
            for g, t in sched.stages:
                if math.isclose(g, gamma, rel_tol=1e-12) and t > 0:
                    return 1.5 * t
        if not gap:
            raise ConfigError("cannot choose a time horizon (zero gap); set time.t_max")
        return 10.0 * math.pi / gap

    def write(self, path: str | None, text: str) -> None:
        if path:
            Path(path).write_text(text)


def _csv_paths(base: str, count: int) -> list[str]:
    if count == 1:
        return [base]
    p = Path(base)
    return [str(p.with_name(f"{p.stem}_stage{k + 1}{p.suffix or '.csv'}")) for k in range(count)]


# ---------------------------------------------------------------- commands

def cmd_build(ctx: Context) -> int:
    g = ctx.graph
    ctx.say(g.summary())
    if ctx.cfg.export_edges:
        ctx.write(ctx.cfg.export_edges, dump_edge_list(g))
    return EXIT_OK


def cmd_symmetry(ctx: Context) -> int:
    g, cfg = ctx.graph, ctx.cfg
    gs = ctx.generators
    doc = {"n": g.n, "generators": len(gs), "claims": gs.claims}
    ctx.say(f"generators={len(gs)} claims={gs.claims}")
    if g.n <= ORDER_DEGREE_CAP:
        order = group_order(gs)
        doc["group_order"] = str(order)
        ctx.say(f"group_order={order}")
    basis = ctx.basis()
    if cfg.basis == "stabilizer":
        st = stabilizer(gs, ctx.marked)
        doc["marked"] = ctx.marked
        doc["stabilizer_generators"] = len(st)
        ctx.say(f"marked={ctx.marked} stabilizer_generators={len(st)}")
        if cfg.export_generators:
            ctx.write(cfg.export_generators, st.to_text())
    elif cfg.export_generators:
        ctx.write(cfg.export_generators, gs.to_text())
    sizes = [int(s) for s in basis.sizes]
    ctx.say(f"classes={basis.dim} orbit_sizes={sizes}")
    doc.update(classes=basis.dim, orbit_sizes=sizes, labels=list(basis.labels),
               members=[list(c) for c in basis.classes])
    ctx.write(cfg.json, sio.dumps_json(doc))
    return EXIT_OK


def cmd_reduce(ctx: Context) -> int:
    g, w = ctx.graph, ctx.marked
    gamma = ctx.gamma()
    basis = ctx.basis()
    H = _hamiltonian(g, ctx.kind, gamma, w, sparse=True)
    red = reduce(H, basis)
    residual = invariance_residual(H, basis)
    ctx.say(f"dim={red.dim} gamma={gamma:.12g} matrix_kind={ctx.kind} residual={residual:.3e}")
    ctx.say("labels=" + " ".join(basis.labels))
    ctx.say("sizes=" + " ".join(str(int(s)) for s in basis.sizes))
    for row in red.matrix:
        ctx.say(" ".join(f"{x: .12g}" for x in row))
    doc = {"gamma": gamma, "matrix_kind": ctx.kind, "marked": w, "residual": residual}
    doc.update(sio.reduced_block(red))
    ctx.write(ctx.cfg.json, sio.dumps_json(doc))
    return EXIT_OK


def _reduced_spectrum(ctx: Context, gamma: float):
    basis = ctx.basis()
    if ctx.cfg.basis != "stabilizer":
        raise ConfigError("evolution needs the stabilizer basis (marked vertex as its own class)")
    red = reduce(_hamiltonian(ctx.graph, ctx.kind, gamma, ctx.marked, sparse=True), basis)
    return basis, red, eigendecompose(red.matrix, tol=ctx.cfg.tol_eigen)


def cmd_evolve(ctx: Context) -> int:
    g, w = ctx.graph, ctx.marked
    gamma = ctx.gamma()
    basis, red, spec = _reduced_spectrum(ctx, gamma)
    gap = spectral_gap(spec) if spec.dim > 1 else None
    t_max = ctx.horizon(gamma, gap)
    times = np.linspace(0.0, t_max, ctx.cfg.steps)
    s = project_state(uniform_state(g.n), basis)
    trace = evolve(spec, s, times, basis_kind="reduced", sizes=basis.sizes, labels=basis.labels)
    p = trace.probabilities[:, 0]
    k = int(np.argmax(p))
    marked_state = np.zeros(basis.dim)
    marked_state[0] = 1.0
    overlaps = overlap_table(spec, {"s": s, "w": marked_state})
    ctx.say(f"gamma={gamma:.12g} gap={'none' if gap is None else f'{gap:.12g}'} t_max={t_max:.12g}")
    ctx.say(f"max_success={p[k]:.12g} at_t={times[k]:.12g} final_success={p[-1]:.12g}")
    doc = {"gamma": gamma, "matrix_kind": ctx.kind, "marked": w, "t_max": t_max, "steps": ctx.cfg.steps,
           "max_success": float(p[k]), "argmax_time": float(times[k]), "final_success": float(p[-1]),
           "spectrum": sio.spectrum_block(spec, overlaps), "reduced": sio.reduced_block(red)}
    ctx.write(ctx.cfg.json, sio.dumps_json(doc))
    if ctx.cfg.csv:
        ctx.write(ctx.cfg.csv, sio.trace_csv(trace))
    return EXIT_OK


def _report_doc(report, sched: Schedule) -> dict:
    stages = []
    for st in report.stages:
        stages.append({"gamma": st.gamma, "duration": st.duration, "gap": st.gap,
                       "predicted_peak_time": st.predicted_peak, "measured_peak_time": st.measured_peak,
                       "peak_success": st.peak_success, "end_success": st.end_success})
    return {"final_success": report.final_success, "basis": report.basis_kind,
            "labels": list(report.labels), "sizes": report.sizes,
            "final_probabilities": (np.abs(report.final_state) ** 2).tolist(),
            "stages": stages, "deviation": report.deviation, **report.meta}


def cmd_search(ctx: Context) -> int:
    g, w, cfg = ctx.graph, ctx.marked, ctx.cfg
    sched = ctx.schedule()
    basis = ctx.basis()
    if cfg.verify_full:
        ver = verify_reduced_vs_full(g, w, sched, cfg.tol_verify, kind=ctx.kind, basis=basis,
                                     steps=cfg.steps, eigen_tol=cfg.tol_eigen)
        report = ver.reduced
    else:
        report = run_schedule(g, ctx.kind, w, sched, basis, steps=cfg.steps, eigen_tol=cfg.tol_eigen)
    for k, st in enumerate(report.stages):
        gap = "none" if st.gap is None else f"{st.gap:.12g}"
        ctx.say(f"stage={k + 1} gamma={st.gamma:.12g} duration={st.duration:.12g} gap={gap} "
                f"peak_t={st.measured_peak:.12g} peak_success={st.peak_success:.12g} "
                f"end_success={st.end_success:.12g}")
    ctx.say(f"final_success={report.final_success:.12g}")
    ctx.write(cfg.json, sio.dumps_json(_report_doc(report, sched)))
    if cfg.csv:
        for path, st in zip(_csv_paths(cfg.csv, len(report.stages)), report.stages):
            ctx.write(path, sio.trace_csv(st.trace))
    if cfg.verify_full:
        status = "PASS" if ver.passed else "FAIL"
        ctx.say(f"{status} reduced_vs_full deviation={ver.max_deviation:.3e} tol={ver.tol:.1e}")
        if not ver.passed:
            raise VerificationFailed()
    return EXIT_OK


def cmd_scan(ctx: Context) -> int:
    g, w, cfg = ctx.graph, ctx.marked, ctx.cfg
    if cfg.basis != "stabilizer":
        raise ConfigError("scan needs the stabilizer basis")
    center = ctx.gamma()
    if cfg.gammas is not None:
        gammas = np.asarray([float(x) for x in cfg.gammas])
    else:
        if center <= 0:
            raise ConfigError("default gamma grid needs a positive center gamma")
        gammas = default_gamma_grid(center)
    basis = ctx.basis()
    if cfg.t_max is not None:
        horizon = float(cfg.t_max)
    else:
        _, _, spec = _reduced_spectrum(ctx, center)
        horizon = ctx.horizon(center, spectral_gap(spec) if spec.dim > 1 else None)
    records = scan_gamma(g, w, gammas, horizon, kind=ctx.kind, basis=basis, steps=cfg.steps,
                         eigen_tol=cfg.tol_eigen)
    best = max(records, key=lambda r: r.max_success)
    ctx.say(f"points={len(records)} horizon={horizon:.12g}")
    ctx.say(f"best_gamma={best.gamma:.12g} max_success={best.max_success:.12g} at_t={best.argmax_time:.12g}")
    doc = {"horizon": horizon, "matrix_kind": ctx.kind, "marked": w,
           "records": [{"gamma": r.gamma, "gap": r.gap, "max_success": r.max_success,
                        "argmax_time": r.argmax_time} for r in records]}
    ctx.write(cfg.json, sio.dumps_json(doc))
    if cfg.csv:
        lines = ["gamma,gap,max_success,argmax_time"]
        f = lambda x: "" if x is None else f"{x:.{sio.CSV_DIGITS}g}"
        lines += [",".join(f(x) for x in (r.gamma, r.gap, r.max_success, r.argmax_time)) for r in records]
        ctx.write(cfg.csv, "\n".join(lines) + "\n")
    return EXIT_OK


def _orbit_spread(amps: np.ndarray, classes) -> float:
    worst = 0.0
    for c in classes:
        if len(c) > 1:
            block = amps[:, list(c)]
            worst = max(worst, float(np.max(np.abs(block - block[:, :1]))))
    return worst


def cmd_verify(ctx: Context) -> int:
    g, w, cfg = ctx.graph, ctx.marked, ctx.cfg
    if g.n > FULL_CAP:
        raise ResourceLimitError(f"full-space checks capped at {FULL_CAP} vertices (n={g.n})")
    sched = ctx.schedule()
    basis = ctx.basis()
    checks = []

    def check(name, value, tol, note=""):
        ok = value is not None and value <= tol
        checks.append((name, ok))
        shown = "n/a" if value is None else f"{value:.3e}"
        ctx.say(f"{'PASS' if ok else 'FAIL'} {name} value={shown} tol={tol:.1e}{note}")

    residual = max(invariance_residual(_hamiltonian(g, ctx.kind, gamma, w, sparse=True), basis)
                   for gamma, _ in sched.stages)
    check("invariance_residual", residual, RESIDUAL_TOL)

    full = run_schedule(g, ctx.kind, w, sched, None, engine="expm", steps=cfg.steps)
    spread = 0.0
    for st in full.stages:
        rows = np.unique(np.linspace(0, len(st.trace.times) - 1, ORBIT_SAMPLES).round().astype(int))
        spread = max(spread, _orbit_spread(st.trace.amplitudes[rows], basis.classes))
    check("orbit_identical_evolution", spread, ORBIT_TOL)

    singleton = basis.sizes[basis.class_index[w]] == 1
    if singleton:
        ver = verify_reduced_vs_full(g, w, sched, cfg.tol_verify, kind=ctx.kind, basis=basis,
                                     steps=cfg.steps, eigen_tol=cfg.tol_eigen)
        check("reduced_vs_full", ver.max_deviation, cfg.tol_verify)
        traces = [s.trace for s in ver.reduced.stages] + [s.trace for s in ver.full.stages]
    else:
        check("reduced_vs_full", None, cfg.tol_verify, " (marked vertex is not its own class)")
        traces = [s.trace for s in full.stages]

    drift = max(float(np.max(np.abs(t.norms - 1.0))) for t in traces)
    # energy conservation per stage, measured in the full space
    for (gamma, _), st in zip(sched.stages, full.stages):
        H = _hamiltonian(g, ctx.kind, gamma, w, sparse=True)
        amps = st.trace.amplitudes
        energy = np.real(np.einsum("ti,ti->t", amps.conj(), (H @ amps.T).T))
        drift = max(drift, float(np.max(np.abs(energy - energy[0]))))
    check("unitarity", drift, UNITARITY_TOL)

    passed = all(ok for _, ok in checks)
    ctx.say(f"{'PASS' if passed else 'FAIL'} {sum(ok for _, ok in checks)}/{len(checks)} checks")
    ctx.write(cfg.json, sio.dumps_json({"passed": passed, "checks": dict(checks)}))
    if not passed:
        raise VerificationFailed()
    return EXIT_OK


def cmd_lanczos(ctx: Context) -> int:
    g, w, cfg = ctx.graph, ctx.marked, ctx.cfg
    gamma = ctx.gamma()
    basis = ctx.basis()
    H = _hamiltonian(g, ctx.kind, gamma, w, sparse=True)
    if cfg.krylov_start == "marked":
        start = np.zeros(g.n)
        start[w] = 1.0
    else:
        start = uniform_state(g.n)
    k = cfg.krylov_dim or basis.dim
    if not 1 <= k <= g.n:
        raise ConfigError(f"krylov dim must lie in 1..{g.n}")
    vecs = lanczos_basis(H, start, k)
    K = np.column_stack(vecs)
    B = basis.matrix()
    angles = scipy.linalg.subspace_angles(K, B) if K.shape[1] <= B.shape[1] else None
    coords = project_state(K.T, basis)
    off_span = float(np.max(np.linalg.norm(K - B @ (B.T @ K), axis=0)))
    ctx.say(f"krylov_dim={K.shape[1]} orbit_dim={basis.dim} gamma={gamma:.12g}")
    ctx.say("labels=" + " ".join(basis.labels))
    for j, row in enumerate(coords):
        ctx.say(f"v{j}=" + " ".join(f"{x: .12g}" for x in row))
    max_angle = None if angles is None else float(np.max(angles, initial=0.0))
    ctx.say(f"outside_orbit_span={off_span:.3e} max_principal_angle="
            f"{'n/a' if max_angle is None else f'{max_angle:.3e}'}")
    doc = {"gamma": gamma, "matrix_kind": ctx.kind, "marked": w, "start": cfg.krylov_start,
           "labels": list(basis.labels), "sizes": [int(s) for s in basis.sizes],
           "vectors": coords.tolist(), "outside_orbit_span": off_span, "max_principal_angle": max_angle}
    ctx.write(cfg.json, sio.dumps_json(doc))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "symmetry": cmd_symmetry,
    "reduce": cmd_reduce,
    "evolve": cmd_evolve,
    "search": cmd_search,
    "scan": cmd_scan,
    "verify": cmd_verify,
    "lanczos": cmd_lanczos,
}


def _gamma_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symsearch", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=list(COMMANDS))
    ap.add_argument("--config", help="YAML run configuration")
    gr = ap.add_argument_group("graph")
    gr.add_argument("--family")
    gr.add_argument("--n", type=int)
    gr.add_argument("--r", type=int, help="tree height")
    gr.add_argument("--M", type=int, help="branching / clique size")
    gr.add_argument("--order", type=int, help="simplex recursion order")
    gr.add_argument("--edges", help="edge-list file instead of a family")
    run = ap.add_argument_group("run")
    run.add_argument("--marked", type=int)
    run.add_argument("--kind", dest="matrix_kind", choices=["laplacian", "adjacency"])
    run.add_argument("--gamma", type=float)
    run.add_argument("--gammas", type=_gamma_list, help="scan grid, comma separated")
    run.add_argument("--schedule", help="'predicted' or 'gamma:T,gamma:T,...'")
    run.add_argument("--t-max", dest="t_max", type=float)
    run.add_argument("--steps", type=int)
    run.add_argument("--symmetry", choices=["auto", "family", "search", "file"])
    run.add_argument("--generators", help="generator file for --symmetry file")
    run.add_argument("--search-cap", dest="search_cap", type=int)
    run.add_argument("--search-timeout", dest="search_timeout", type=float)
    run.add_argument("--basis", choices=["stabilizer", "unmarked"])
    run.add_argument("--krylov-dim", dest="krylov_dim", type=int)
    run.add_argument("--krylov-start", dest="krylov_start", choices=["marked", "uniform"])
    run.add_argument("--tol-eigen", dest="tol_eigen", type=float)
    run.add_argument("--tol-verify", dest="tol_verify", type=float)
    run.add_argument("--verify-full", dest="verify_full", action="store_true", default=None)
    out = ap.add_argument_group("output")
    out.add_argument("--json")
    out.add_argument("--csv")
    out.add_argument("--export-edges", dest="export_edges")
    out.add_argument("--export-generators", dest="export_generators")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    return apply_overrides(cfg, overrides).validate()


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        ctx = Context(resolve_config(args), out)
        return COMMANDS[args.command](ctx)
    except VerificationFailed:
        return EXIT_VERIFY
    except (ResourceLimitError, PartialResultError, NumericFailureError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERIC
    except (ConfigError, ParseError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
