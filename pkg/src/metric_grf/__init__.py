"""Whittle-Matern Gaussian random fields on metric graphs.

Finite elements per edge, sinc quadrature for the fractional power,
edge-wise Neumann-Neumann domain decomposition for every quadrature step,
and a lumped-mass option that makes white-noise generation linear in N.
"""
from .assembly import MassMode
from .graph import MetricGraph, default_test_graph, generate_barabasi_albert, load_graph, save_graph
from .mesh import build_mesh
from .sampler import FieldSolver, SamplerConfig, sample_field

__all__ = [
    "FieldSolver",
    "MassMode",
    "MetricGraph",
    "SamplerConfig",
    "build_mesh",
    "default_test_graph",
    "generate_barabasi_albert",
    "load_graph",
    "sample_field",
    "save_graph",
]
