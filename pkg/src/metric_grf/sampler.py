"""Full sampling pipeline: mesh, noise, quadrature loop, accumulation."""
from __future__ import annotations

import contextlib
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .assembly import MassMode, assemble_mass, assemble_stiffness
from .dd_solver import StepOperator, solve_step
from .graph import MetricGraph, degrees
from .mesh import Mesh, build_mesh, node_table
from .noise import NoiseVector, factor, sample
from .quadrature import accumulate, plan


@dataclass(frozen=True)
class SamplerConfig:
    beta: float
    kappa: float = 1.0
    mode: MassMode = MassMode.LUMPED
    quad_step: float | None = None  # overrides k = -1/(beta ln h)
    pcg_tol: float = 1e-10
    pcg_max_iter: int | None = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", MassMode(self.mode))


class FieldSolver:
    """Applies ``B = sum_l (A^(l))^{-1}`` on a fixed mesh.

    Right-hand sides may be a single vector or an (N, k) block; each step
    operator is factored once and reused for all columns.
    """

    def __init__(self, mesh: Mesh, config: SamplerConfig):
        self.mesh = mesh
        self.config = config
        self.mass = assemble_mass(mesh, config.mode)
        self.stiffness = assemble_stiffness(mesh)
        self.degree = degrees(mesh.graph)
        self.plan = plan(config.beta, config.kappa, h=mesh.h_target, k=config.quad_step)
        self.iterations = 0

    def step_operator(self, step) -> StepOperator:
        return StepOperator.build(self.mesh, self.mass, self.stiffness,
                                  self.config.kappa, step.c_I, step.c_L, self.degree)

    def _solve_step(self, step, W):
        op = self.step_operator(step)
        cfg = self.config
        if W.ndim == 1:
            res = solve_step(op, W, cfg.pcg_tol, cfg.pcg_max_iter)
            return res.values, res.iterations
        out = np.empty_like(W)
        its = 0
        for j in range(W.shape[1]):
            res = solve_step(op, W[:, j], cfg.pcg_tol, cfg.pcg_max_iter)
            out[:, j] = res.values
            its += res.iterations
        return out, its

    def apply(self, W) -> np.ndarray:
        W = np.asarray(W, dtype=np.float64)
        if W.shape[0] != self.mesh.num_nodes:
            raise ValueError(f"right-hand side has {W.shape[0]} rows, mesh has {self.mesh.num_nodes} nodes")
        if W.ndim == 2:
            W = np.asfortranarray(W)
        iterations = []

        def run(step):
            u, its = self._solve_step(step, W)
            iterations.append(its)
            return u

        threads = max(1, int(self.config.threads))
        if threads == 1:
            total = accumulate(map(run, self.plan.steps))
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                # map() yields in submission order, so the sum is ascending in l
                total = accumulate(pool.map(run, self.plan.steps))
        self.iterations = int(sum(iterations))
        return total


@dataclass(frozen=True, eq=False)
class FieldSample:
    mesh: Mesh
    values: np.ndarray
    noise: NoiseVector
    pcg_iterations: int


def sample_field(graph: MetricGraph, h: float, beta: float, kappa: float = 1.0,
                 mode: MassMode | str = MassMode.LUMPED, seed=0, **options) -> FieldSample:
    """Draw one field sample on ``graph`` at mesh size ``h``.

    Extra keyword arguments are forwarded to :class:`SamplerConfig`.
    """
    mesh = build_mesh(graph, h)
    config = SamplerConfig(beta=beta, kappa=kappa, mode=mode, **options)
    solver = FieldSolver(mesh, config)
    W = sample(factor(solver.mass), seed)
    u = solver.apply(W.full)
    return FieldSample(mesh, u, W, solver.iterations)


@contextlib.contextmanager
def open_output(target):
    """Yield a text stream for ``target``: a path, or an already open file (left open)."""
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def write_field_csv(s: FieldSample, target) -> None:
    edge_id, vertex_id, x = node_table(s.mesh)
    with open_output(target) as fh:
        w = csv.writer(fh)
        w.writerow(["edge_id", "vertex_id", "x", "value"])
        for row in zip(edge_id, vertex_id, x, s.values):
            w.writerow([int(row[0]), int(row[1]), repr(float(row[2])), repr(float(row[3]))])
