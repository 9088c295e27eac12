"""Discrete spatial white noise W = R xi with Cov(W) = M_w."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import MassMatrix, MassMode
from .cholesky import sparse_cholesky
from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class NoiseFactor:
    """Square-root factor of the mass matrix.

    Lumped mode keeps only the diagonal ``sqrt(M_ii)``; consistent mode keeps a
    sparse lower-triangular Cholesky factor computed in mesh ordering.
    """

    mesh: Mesh | None
    mode: MassMode
    sqrt_diag: np.ndarray | None = None
    cholesky: sp.csc_matrix | None = None

    @property
    def size(self) -> int:
        if self.sqrt_diag is not None:
            return len(self.sqrt_diag)
        return self.cholesky.shape[0]

    def apply(self, xi) -> np.ndarray:
        """R @ xi; ``xi`` may be a vector or an (N, k) block of columns."""
        xi = np.asarray(xi, dtype=np.float64)
        if xi.shape[0] != self.size:
            raise ValueError(f"expected {self.size} rows, got {xi.shape[0]}")
        if self.sqrt_diag is not None:
            return self.sqrt_diag.reshape((-1,) + (1,) * (xi.ndim - 1)) * xi
        return self.cholesky @ xi

    def toarray(self) -> np.ndarray:
        if self.sqrt_diag is not None:
            return np.diag(self.sqrt_diag)
        return self.cholesky.toarray()


def factor(M_w: MassMatrix) -> NoiseFactor:
    if M_w.mode is MassMode.LUMPED:
        d = M_w.diagonal
        if np.any(d <= 0):
            raise np.linalg.LinAlgError("lumped mass matrix has a non-positive entry")
        return NoiseFactor(M_w.mesh, MassMode.LUMPED, sqrt_diag=np.sqrt(d))
    return NoiseFactor(M_w.mesh, MassMode.CONSISTENT, cholesky=sparse_cholesky(M_w.matrix))


def factor_matrix(M, mode: MassMode | str) -> NoiseFactor:
    """Factor a bare matrix (dense, sparse or a 1-D diagonal for lumped mode)."""
    mode = MassMode(mode)
    if mode is MassMode.LUMPED:
        if getattr(M, "ndim", None) == 1 or isinstance(M, (list, tuple)):
            d = np.asarray(M, dtype=np.float64)
        else:
            d = sp.csr_matrix(M).diagonal()
        if np.any(d <= 0):
            raise np.linalg.LinAlgError("lumped mass matrix has a non-positive entry")
        return NoiseFactor(None, mode, sqrt_diag=np.sqrt(d))
    return NoiseFactor(None, mode, cholesky=sparse_cholesky(sp.csc_matrix(M)))


@dataclass(frozen=True, eq=False)
class NoiseVector:
    """Noise in mesh ordering, viewable as per-edge interior blocks plus the vertex block."""

    mesh: Mesh
    full: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.full if dtype is None else self.full.astype(dtype)

    def __len__(self):
        return len(self.full)

    def interior(self, e: int) -> np.ndarray:
        return self.full[self.mesh.interior_slice(e)]

    @property
    def interior_blocks(self) -> list[np.ndarray]:
        return [self.interior(e) for e in range(self.mesh.num_edges)]

    @property
    def vertex_block(self) -> np.ndarray:
        return self.full[self.mesh.total_interior:]


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(f: NoiseFactor, seed=None) -> NoiseVector:
    """One draw ``W = R xi`` with ``xi ~ N(0, I)`` from a seeded generator."""
    xi = as_rng(seed).standard_normal(f.size)
    return NoiseVector(f.mesh, f.apply(xi))


def sample_many(f: NoiseFactor, count: int, seed=None) -> np.ndarray:
    """``count`` independent draws as the columns of an (N, count) array."""
    xi = as_rng(seed).standard_normal((f.size, count))
    return f.apply(xi)


def project_noise(P: sp.spmatrix, W_fine, coarse: Mesh | None = None):
    """Restrict fine-mesh noise to coarse hat functions: ``W_coarse = P^T W_fine``."""
    W = np.asarray(W_fine, dtype=np.float64)
    if W.shape[0] != P.shape[0]:
        raise ValueError(f"noise has {W.shape[0]} rows, prolongation expects {P.shape[0]}")
    out = P.T @ W
    if coarse is not None and out.ndim == 1:
        return NoiseVector(coarse, out)
    return out
