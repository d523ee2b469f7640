"""Finite directed multigraphs, their paths and adjacency matrices.

Conventions: an edge ``e`` runs from its source ``s(e)`` to its range ``r(e)``,
and paths are written range-first, so ``e1 e2`` is composable when
``s(e1) == r(e2)``.  Declaration order of vertices and edges is canonical for
matrix indices and for path enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

DEFAULT_MAX_DEPTH = 20


class GraphError(ValueError):
    """Raised for an invalid graph description; ``errors`` lists every violation."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Path:
    """A finite path stored as edge labels; the empty path carries its vertex."""

    edges: tuple[str, ...]
    range: str
    source: str

    def __len__(self) -> int:
        return len(self.edges)

    def __str__(self) -> str:
        if not self.edges:
            return f"()@{self.range}"
        if all(len(e) == 1 for e in self.edges):
            return "".join(self.edges)
        return ".".join(self.edges)


@dataclass(frozen=True)
class DirectedMultigraph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]  # (label, range, source)
    max_depth: int = DEFAULT_MAX_DEPTH
    _vindex: dict = field(init=False, repr=False, compare=False)
    _eindex: dict = field(init=False, repr=False, compare=False)
    _out: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vindex = {v: i for i, v in enumerate(self.vertices)}
        eindex = {e[0]: i for i, e in enumerate(self.edges)}
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for name, r, _ in self.edges:
            out[r].append(name)
        object.__setattr__(self, "_vindex", vindex)
        object.__setattr__(self, "_eindex", eindex)
        object.__setattr__(self, "_out", {v: tuple(es) for v, es in out.items()})

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_names(self) -> tuple[str, ...]:
        return tuple(e[0] for e in self.edges)

    def vertex_index(self, v: str) -> int:
        return self._vindex[v]

    def edge_index(self, e: str) -> int:
        return self._eindex[e]

    def has_edge(self, e: str) -> bool:
        return e in self._eindex

    def r(self, e: str) -> str:
        return self.edges[self._eindex[e]][1]

    def s(self, e: str) -> str:
        return self.edges[self._eindex[e]][2]

    def out_edges(self, v: str) -> tuple[str, ...]:
        """The edges with range ``v`` (the set vE^1), in declaration order."""
        return self._out[v]

    def empty_path(self, v: str) -> Path:
        if v not in self._vindex:
            raise GraphError([f"unknown vertex {v!r}"])
        return Path((), v, v)

    def path(self, edges: Iterable[str], vertex: str | None = None) -> Path:
        """Build a path from edge labels, checking composability.

        ``vertex`` tags the empty path and, when given, must equal the range.
        """
        edges = tuple(edges)
        if not edges:
            if vertex is None:
                raise GraphError(["empty path needs a vertex"])
            return self.empty_path(vertex)
        for e in edges:
            if e not in self._eindex:
                raise GraphError([f"unknown edge {e!r}"])
        for a, b in zip(edges, edges[1:]):
            if self.s(a) != self.r(b):
                raise GraphError([f"edges {a!r} and {b!r} are not composable"])
        rng = self.r(edges[0])
        if vertex is not None and vertex != rng:
            raise GraphError([f"path starts at {rng!r}, not {vertex!r}"])
        return Path(edges, rng, self.s(edges[-1]))

    def parse_path(self, text: str, vertex: str | None = None) -> Path:
        """Parse ``"01"`` (single-character labels) or ``"e1.e2"`` style strings."""
        text = text.strip()
        if text in ("", "()", "-"):
            return self.path((), vertex)
        for sep in (".", ",", " "):
            if sep in text:
                return self.path([t for t in text.replace(",", sep).split(sep) if t], vertex)
        if text in self._eindex:
            return self.path((text,), vertex)
        return self.path(tuple(text), vertex)

    def concat(self, mu: Path, nu: Path) -> Path:
        if mu.source != nu.range:
            raise GraphError([f"cannot concatenate {mu} and {nu}"])
        if not mu.edges:
            return nu
        if not nu.edges:
            return mu
        return Path(mu.edges + nu.edges, mu.range, nu.source)


def validate_graph(raw: dict, max_depth: int = DEFAULT_MAX_DEPTH) -> DirectedMultigraph:
    """Validate a ``{"vertices": [...], "edges": [{"name", "range", "source"}]}`` mapping."""
    errors = []
    vertices = [str(v) for v in raw.get("vertices", [])]
    if not vertices:
        errors.append("empty vertex set")
    seen = set()
    for v in vertices:
        if v in seen:
            errors.append(f"duplicate label: vertex {v!r}")
        seen.add(v)
    edges = []
    seen_e = set()
    for item in raw.get("edges", []):
        try:
            name, r, s = str(item["name"]), str(item["range"]), str(item["source"])
        except (KeyError, TypeError):
            errors.append(f"malformed edge entry {item!r}")
            continue
        if name in seen_e or name in seen:
            errors.append(f"duplicate label: edge {name!r}")
        seen_e.add(name)
        for role, v in (("range", r), ("source", s)):
            if v not in seen:
                errors.append(f"dangling endpoint: edge {name!r} has undeclared {role} {v!r}")
        edges.append((name, r, s))
    if errors:
        raise GraphError(errors)
    return DirectedMultigraph(tuple(vertices), tuple(edges), max_depth)


def graph_to_dict(graph: DirectedMultigraph) -> dict:
    return {
        "vertices": list(graph.vertices),
        "edges": [{"name": n, "range": r, "source": s} for n, r, s in graph.edges],
    }


def _extend(graph: DirectedMultigraph, prefix: tuple[str, ...], v: str, k: int) -> Iterator[tuple[str, ...]]:
    if k == 0:
        yield prefix
        return
    for e in graph.out_edges(v):
        yield from _extend(graph, prefix + (e,), graph.s(e), k - 1)


def enumerate_paths(graph: DirectedMultigraph, start: str | None, k: int) -> list[Path]:
    """All paths of length ``k`` (starting at ``start`` when given), in edge order."""
    if k < 0:
        raise ValueError("path length must be nonnegative")
    if k > graph.max_depth:
        raise GraphError([f"depth {k} exceeds enumeration guard {graph.max_depth}"])
    starts = graph.vertices if start is None else (start,)
    if k == 0:
        return [graph.empty_path(v) for v in starts]
    paths = []
    if start is None:
        # lexicographic in the first edge, so iterate edges rather than vertices
        for e in graph.edge_names:
            for tail in _extend(graph, (e,), graph.s(e), k - 1):
                paths.append(Path(tail, graph.r(e), graph.s(tail[-1])))
        return paths
    for tail in _extend(graph, (), start, k):
        paths.append(Path(tail, start, graph.s(tail[-1])))
    return paths


def adjacency_matrix(graph: DirectedMultigraph) -> np.ndarray:
    """``A[v, w]`` is the number of edges with range ``v`` and source ``w``."""
    A = np.zeros((graph.num_vertices, graph.num_vertices), dtype=np.int64)
    for _, r, s in graph.edges:
        A[graph.vertex_index(r), graph.vertex_index(s)] += 1
    return A


def is_irreducible(A: np.ndarray) -> bool:
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 1:
        return bool(A[0, 0] > 0)
    n, _ = connected_components(csr_matrix(A > 0), directed=True, connection="strong")
    return n == 1


def is_strongly_connected(graph: DirectedMultigraph) -> bool:
    """True iff every ordered pair of vertices is joined by a nonempty path."""
    return is_irreducible(adjacency_matrix(graph))
