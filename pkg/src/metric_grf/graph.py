"""Compact metric graphs: container, text I/O and synthetic generators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Base class for graph input problems."""


class GraphParseError(GraphError):
    pass


class GraphValidationError(GraphError):
    pass


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Vertices ``0..num_vertices-1`` joined by edges of positive length.

    Edge ``e`` runs from ``heads[e]`` (local coordinate 0) to ``tails[e]``
    (local coordinate ``lengths[e]``). Parallel edges are allowed, self-loops
    are not.
    """

    num_vertices: int
    heads: np.ndarray
    tails: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        heads = np.asarray(self.heads, dtype=np.int64).reshape(-1)
        tails = np.asarray(self.tails, dtype=np.int64).reshape(-1)
        lengths = np.asarray(self.lengths, dtype=np.float64).reshape(-1)
        for arr in (heads, tails, lengths):
            arr.setflags(write=False)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "num_vertices", int(self.num_vertices))
        self._validate()

    def _validate(self):
        nv = self.num_vertices
        if nv < 1:
            raise GraphValidationError("graph needs at least one vertex")
        if not (len(self.heads) == len(self.tails) == len(self.lengths)):
            raise GraphValidationError("edge arrays differ in length")
        if len(self.heads) == 0:
            raise GraphValidationError("graph has no edges")
        bad = np.flatnonzero(~(np.isfinite(self.lengths) & (self.lengths > 0)))
        if bad.size:
            e = int(bad[0])
            raise GraphValidationError(
                f"edge {e} has non-positive length {self.lengths[e]!r}"
            )
        ends = np.concatenate([self.heads, self.tails])
        if ends.min() < 0 or ends.max() >= nv:
            raise GraphValidationError(f"vertex id out of range 0..{nv - 1}")
        loops = np.flatnonzero(self.heads == self.tails)
        if loops.size:
            e = int(loops[0])
            raise GraphValidationError(
                f"edge {e} is a self-loop at vertex {self.heads[e]}"
            )
        isolated = np.flatnonzero(np.bincount(ends, minlength=nv) == 0)
        if isolated.size:
            raise GraphValidationError(f"vertex {int(isolated[0])} is isolated")

    @classmethod
    def from_edges(cls, num_vertices, edges) -> "MetricGraph":
        """Build from an iterable of ``(u, v, length)`` triples."""
        edges = list(edges)
        if not edges:
            return cls(num_vertices, [], [], [])
        u, v, length = zip(*edges)
        return cls(num_vertices, u, v, length)

    @property
    def num_edges(self) -> int:
        return len(self.lengths)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def edges(self):
        """Iterate over ``(u, v, length)`` triples."""
        for u, v, length in zip(self.heads, self.tails, self.lengths):
            yield int(u), int(v), float(length)

    def same_structure(self, other: "MetricGraph") -> bool:
        return (
            self.num_vertices == other.num_vertices
            and np.array_equal(self.heads, other.heads)
            and np.array_equal(self.tails, other.tails)
            and np.array_equal(self.lengths, other.lengths)
        )

    def __repr__(self):
        return f"MetricGraph(|V|={self.num_vertices}, |E|={self.num_edges})"


def degrees(g: MetricGraph) -> np.ndarray:
    """Number of incident edge endpoints per vertex (parallel edges count once each)."""
    return np.bincount(
        np.concatenate([g.heads, g.tails]), minlength=g.num_vertices
    ).astype(np.int64)


def default_test_graph() -> MetricGraph:
    """Triangle 0-1-2 with a pendant edge 0-3, all edges of unit length.

    Used by the convergence studies; vertex degrees are (3, 2, 2, 1).
    """
    return MetricGraph.from_edges(
        4, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 3, 1.0)]
    )


def parse_graph(text: str) -> MetricGraph:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lines.append((lineno, line.split()))
    if not lines:
        raise GraphParseError("empty graph file")

    lineno, header = lines[0]
    if len(header) != 2:
        raise GraphParseError(f"line {lineno}: expected 'num_vertices num_edges'")
    try:
        nv, ne = int(header[0]), int(header[1])
    except ValueError:
        raise GraphParseError(f"line {lineno}: header must hold two integers") from None
    if ne != len(lines) - 1:
        raise GraphParseError(
            f"header announces {ne} edges but {len(lines) - 1} edge lines follow"
        )

    edges = []
    for lineno, fields in lines[1:]:
        if len(fields) != 3:
            raise GraphParseError(f"line {lineno}: expected 'u v length'")
        try:
            edges.append((int(fields[0]), int(fields[1]), float(fields[2])))
        except ValueError:
            raise GraphParseError(f"line {lineno}: cannot parse {' '.join(fields)!r}") from None
    return MetricGraph.from_edges(nv, edges)


def load_graph(path) -> MetricGraph:
    return parse_graph(Path(path).read_text())


def format_graph(g: MetricGraph) -> str:
    out = [f"{g.num_vertices} {g.num_edges}"]
    # repr() of a float round-trips exactly
    out.extend(f"{u} {v} {length!r}" for u, v, length in g.edges())
    return "\n".join(out) + "\n"


def save_graph(g: MetricGraph, path) -> None:
    Path(path).write_text(format_graph(g))


def generate_barabasi_albert(
    n: int, m: int, edge_length: float = 1.0, seed: int | None = 0
) -> MetricGraph:
    """Preferential-attachment graph grown from an (m+1)-clique.

    Each new vertex attaches to ``m`` distinct existing vertices drawn with
    probability proportional to their current degree, so the result has
    ``C(m+1, 2) + m (n - m - 1)`` edges, all of length ``edge_length``.
    """
    if m < 1 or n <= m:
        raise ValueError(f"Barabasi-Albert needs n > m >= 1, got n={n}, m={m}")
    if not edge_length > 0:
        raise ValueError("edge_length must be positive")
    rng = np.random.default_rng(seed)

    num_edges = math.comb(m + 1, 2) + m * (n - m - 1)
    heads = np.empty(num_edges, dtype=np.int64)
    tails = np.empty(num_edges, dtype=np.int64)
    # every edge endpoint appears once, so uniform picks are degree-weighted
    endpoints = np.empty(2 * num_edges, dtype=np.int64)

    e = 0
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            heads[e], tails[e] = i, j
            endpoints[2 * e], endpoints[2 * e + 1] = i, j
            e += 1

    for new in range(m + 1, n):
        pool = 2 * e
        targets: list[int] = []
        while len(targets) < m:
            t = int(endpoints[rng.integers(pool)])
            if t not in targets:
                targets.append(t)
        for t in sorted(targets):
            heads[e], tails[e] = t, new
            endpoints[2 * e], endpoints[2 * e + 1] = t, new
            e += 1

    return MetricGraph(n, heads, tails, np.full(num_edges, float(edge_length)))
