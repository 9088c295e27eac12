"""Convergence and performance experiments.

Error levels use nested meshes ``h = 2**-level`` on unit-compatible edge
lengths. Squared errors are reported as measured; convergence rates are
fitted to their square roots, i.e. to the L2 error itself.
"""
from __future__ import annotations

import csv
import statistics
import time
import tracemalloc
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .assembly import MassMode, assemble_mass
from .graph import MetricGraph, default_test_graph, generate_barabasi_albert
from .mesh import build_mesh, prolongation
from .noise import factor, project_noise, sample
from .sampler import FieldSolver, SamplerConfig, open_output


def fit_rate(pairs) -> tuple[float, float]:
    """Least-squares fit of ``ln err = c + r ln h``; returns ``(r, c)``."""
    pairs = list(pairs)
    if len(pairs) < 2:
        raise ValueError("need at least two (h, err) points")
    h, err = np.array(pairs, dtype=np.float64).T
    if np.any(h <= 0) or np.any(err <= 0):
        raise ValueError("h and err must be positive")
    X = np.column_stack([np.ones_like(h), np.log(h)])
    (c, r), *_ = np.linalg.lstsq(X, np.log(err), rcond=None)
    return float(r), float(c)


def strong_rate_theory(beta: float) -> float:
    return 2.0 * beta - 0.5


def covariance_rate_theory(beta: float) -> float:
    return min(4.0 * beta - 0.5, 2.0)


@dataclass(frozen=True)
class ConvergenceReport:
    beta: float
    levels: tuple[int, ...]
    h: np.ndarray
    err: np.ndarray  # squared errors per level
    rate: float  # fitted to sqrt(err)
    intercept: float
    theory: float

    def rows(self):
        for lvl, h, e in zip(self.levels, self.h, self.err):
            yield {"beta": self.beta, "level": lvl, "h": h, "err": e,
                   "rate": "", "theory": "", "intercept": ""}
        yield {"beta": self.beta, "level": "fit", "h": "", "err": "",
               "rate": self.rate, "theory": self.theory, "intercept": self.intercept}


class StrongErrorReport(ConvergenceReport):
    pass


class CovErrorReport(ConvergenceReport):
    pass


def _report(cls, beta, levels, errs, theory):
    h = np.array([2.0**-l for l in levels])
    err = np.asarray(errs, dtype=np.float64)
    if len(levels) < 2:
        rate = intercept = float("nan")
    else:
        rate, intercept = fit_rate(zip(h, np.sqrt(err)))
    return cls(beta, tuple(levels), h, err, rate, intercept, theory)


def _check_levels(ell_ok, ell_coarse):
    if not ell_coarse:
        raise ValueError("need at least one coarse level")
    if max(ell_coarse) > ell_ok:
        raise ValueError("coarse levels must not be finer than the overkill level")


def strong_error_study(
    betas: Sequence[float],
    ell_ok: int = 10,
    ell_coarse: Sequence[int] = (3, 4, 5, 6),
    reps: int = 50,
    seed: int = 0,
    graph: MetricGraph | None = None,
    mode: MassMode | str = MassMode.LUMPED,
    kappa: float = 1.0,
    pcg_tol: float = 1e-10,
    threads: int = 1,
) -> list[StrongErrorReport]:
    """Mean squared L2 error between overkill and coarse solutions driven by the same noise.

    Each realisation draws white noise on the overkill mesh, restricts it to
    the coarse mesh with ``P^T``, solves on both meshes and compares after
    interpolating the coarse solution back. The error is always measured in
    the consistent overkill mass norm.
    """
    _check_levels(ell_ok, ell_coarse)
    graph = graph or default_test_graph()
    fine = build_mesh(graph, 2.0**-ell_ok)
    M_ok = assemble_mass(fine, MassMode.CONSISTENT).matrix
    coarse = {l: build_mesh(graph, 2.0**-l) for l in ell_coarse}
    P = {l: prolongation(coarse[l], fine) for l in ell_coarse}

    # realisation i always uses the i-th child stream, whatever the batch size
    streams = np.random.SeedSequence(seed).spawn(reps)
    fine_factor = factor(assemble_mass(fine, mode))
    W = np.column_stack([sample(fine_factor, np.random.default_rng(s)).full for s in streams])

    reports = []
    for beta in betas:
        cfg = SamplerConfig(beta=beta, kappa=kappa, mode=mode, pcg_tol=pcg_tol, threads=threads)
        u_ok = FieldSolver(fine, cfg).apply(W)
        errs = []
        for l in ell_coarse:
            u_c = FieldSolver(coarse[l], cfg).apply(project_noise(P[l], W))
            d = u_ok - P[l] @ u_c
            errs.append(float(np.mean(np.einsum("ij,ij->j", d, M_ok @ d))))
        reports.append(_report(StrongErrorReport, beta, ell_coarse, errs, strong_rate_theory(beta)))
    return reports


def covariance_matrix(solver: FieldSolver) -> np.ndarray:
    """Nodal covariance ``Q = B M_w B^T`` of the discrete field, ``B = sum_l (A^(l))^{-1}``.

    Columns of B come from solving against unit vectors through the
    domain-decomposition solver.
    """
    B = solver.apply(np.eye(solver.mesh.num_nodes))
    return B @ (solver.mass.matrix @ B.T)


def covariance_error_study(
    betas: Sequence[float],
    ell_ok: int = 7,
    ell_coarse: Sequence[int] = (2, 3, 4),
    graph: MetricGraph | None = None,
    mode: MassMode | str = MassMode.LUMPED,
    kappa: float = 1.0,
    pcg_tol: float = 1e-10,
    threads: int = 1,
    max_nodes: int = 4096,
) -> list[CovErrorReport]:
    """Squared L2(G x G) distance between overkill and upsampled coarse covariances.

    Covariances are treated as piecewise constant on the overkill mesh, with
    cell weights given by the lumped overkill mass.
    """
    _check_levels(ell_ok, ell_coarse)
    graph = graph or default_test_graph()
    fine = build_mesh(graph, 2.0**-ell_ok)
    if fine.num_nodes > max_nodes:
        raise ValueError(
            f"overkill mesh has {fine.num_nodes} nodes; dense covariances are capped at {max_nodes}"
        )
    w = assemble_mass(fine, MassMode.LUMPED).diagonal
    ww = np.outer(w, w)
    coarse = {l: build_mesh(graph, 2.0**-l) for l in ell_coarse}

    reports = []
    for beta in betas:
        cfg = SamplerConfig(beta=beta, kappa=kappa, mode=mode, pcg_tol=pcg_tol, threads=threads)
        Q_ok = covariance_matrix(FieldSolver(fine, cfg))
        errs = []
        for l in ell_coarse:
            P = prolongation(coarse[l], fine)
            Q_c = covariance_matrix(FieldSolver(coarse[l], cfg))
            D = Q_ok - P @ Q_c @ P.T
            errs.append(float(np.sum(D * D * ww)))
        reports.append(_report(CovErrorReport, beta, ell_coarse, errs, covariance_rate_theory(beta)))
    return reports


# ---------------------------------------------------------------------------
# performance


@dataclass(frozen=True)
class PerfRecord:
    graph_vertices: int
    graph_edges: int
    num_nodes: int
    mode: str
    task: str  # noise_only | full_grf
    wall_time: float  # seconds, median over repeats
    pcg_iterations: int
    peak_memory_kib: float | None = None


def time_call(fn: Callable[[], object], repeats: int = 3, min_time: float = 0.05) -> float:
    """Median over ``repeats`` of the per-call time, each measured over enough
    back-to-back calls to span ``min_time`` seconds."""
    samples = []
    for _ in range(repeats):
        calls = 0
        start = time.perf_counter()
        while True:
            fn()
            calls += 1
            elapsed = time.perf_counter() - start
            if elapsed >= min_time:
                break
        samples.append(elapsed / calls)
    return statistics.median(samples)


def peak_memory_kib(fn: Callable[[], object]) -> float:
    """Peak Python-heap allocation (numpy buffers included) during one call, in KiB."""
    tracemalloc.start()
    try:
        tracemalloc.reset_peak()
        fn()
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return peak / 1024.0


def perf_study(
    sizes: Sequence[int] = (100, 500, 1000, 2000, 5000),
    h: float = 2.0**-6,
    modes: Sequence[str] = ("lumped", "consistent"),
    tasks: Sequence[str] = ("noise_only", "full_grf"),
    seed: int = 0,
    beta: float = 0.5,
    kappa: float = 1.0,
    attachment: int = 2,
    repeats: int = 3,
    min_time: float = 0.05,
    measure_memory: bool = False,
    threads: int = 1,
    progress: Callable[[PerfRecord], None] | None = None,
) -> list[PerfRecord]:
    """Time noise generation and the full pipeline on Barabasi-Albert graphs.

    Matrix assembly happens outside the timed region; ``noise_only`` times
    factor + draw, ``full_grf`` additionally the quadrature loop.
    """
    for task in tasks:
        if task not in ("noise_only", "full_grf"):
            raise ValueError(f"unknown task {task!r}")
    records = []
    for n in sizes:
        g = generate_barabasi_albert(n, attachment, 1.0, seed)
        mesh = build_mesh(g, h)
        for mode in modes:
            solver = FieldSolver(mesh, SamplerConfig(beta=beta, kappa=kappa, mode=mode, threads=threads))
            rng = np.random.default_rng(seed)
            for task in tasks:
                if task == "noise_only":
                    def run():
                        return sample(factor(solver.mass), rng)
                else:
                    def run():
                        return solver.apply(sample(factor(solver.mass), rng).full)
                run()  # warm-up: compilation and first-touch costs
                wall = time_call(run, repeats, min_time)
                iters = solver.iterations if task == "full_grf" else 0
                mem = peak_memory_kib(run) if measure_memory else None
                rec = PerfRecord(n, g.num_edges, mesh.num_nodes, str(MassMode(mode).value),
                                 task, wall, iters, mem)
                records.append(rec)
                if progress is not None:
                    progress(rec)
    return records


def loglog_slope(x, y) -> float:
    return fit_rate(zip(x, y))[0]


# ---------------------------------------------------------------------------
# CSV output


def write_report_csv(reports: Sequence[ConvergenceReport], target) -> None:
    cols = ["beta", "level", "h", "err", "rate", "theory", "intercept"]
    with open_output(target) as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for rep in reports:
            for row in rep.rows():
                w.writerow(row)


def write_perf_csv(records: Sequence[PerfRecord], target) -> None:
    cols = ["graph_vertices", "graph_edges", "num_nodes", "mode", "task",
            "wall_time", "pcg_iterations", "peak_memory_kib"]
    with open_output(target) as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            mem = "" if r.peak_memory_kib is None else f"{r.peak_memory_kib:.1f}"
            w.writerow([r.graph_vertices, r.graph_edges, r.num_nodes, r.mode, r.task,
                        f"{r.wall_time:.6g}", r.pcg_iterations, mem])


def rate_summary(reports: Sequence[ConvergenceReport]) -> str:
    lines = []
    for r in reports:
        lines.append(f"beta={r.beta:.4g}  rate={r.rate:.3f}  theory={r.theory:.3f}  "
                     f"|diff|={abs(r.rate - r.theory):.3f}")
    return "\n".join(lines)

