"""
Graphs, transition matrices and the edge basis of the bipartite double cover.

Vertices are 0-based everywhere in this module. Torus vertices use row-major
indexing, vertex ``(i, j)`` of a ``side x side`` torus is ``i * side + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSizeError

__all__ = [
    "Graph",
    "StochasticMatrix",
    "MarkedSet",
    "EdgeBasis",
    "ReductionMap",
    "cycle_graph",
    "torus_grid_graph",
    "graph_from_edges",
    "transition_matrix",
    "absorbing_matrix",
    "edge_basis",
    "diagonal_marked_set",
    "grid_to_cycle_reduction",
    "torus_index",
    "torus_coords",
]

GRAPH_KINDS = ("cycle", "torus_grid", "general")


@dataclass(frozen=True)
class Graph:
    """
    Undirected simple graph stored as sorted adjacency lists.

    Attributes
    ----------
    n : int
        Number of vertices.
    adjacency : tuple of tuple of int
        ``adjacency[v]`` is the sorted tuple of neighbours of ``v``.
    kind : str
        One of ``"cycle"``, ``"torus_grid"`` or ``"general"``.
    side : int or None
        Side length for torus grids.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    kind: str = "general"
    side: int | None = None

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.n < 1 or len(self.adjacency) != self.n:
            raise ValueError("adjacency must have one entry per vertex")
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbours of {v} must be sorted and unique")
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise ValueError(f"neighbour {u} of {v} out of range")
                if u == v:
                    raise ValueError(f"self-loop at vertex {v}")
                if v not in self.adjacency[u]:
                    raise ValueError(f"edge {v}-{u} is not symmetric")
        if self.kind == "cycle" and any(len(a) != 2 for a in self.adjacency):
            raise ValueError("cycle vertices must have degree 2")
        if self.kind == "torus_grid":
            if self.side is None or self.side ** 2 != self.n:
                raise ValueError("torus grid needs n == side**2")
            if any(len(a) != 4 for a in self.adjacency):
                raise ValueError("torus vertices must have degree 4")

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges ``(u, v)`` with ``u < v``, sorted."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @cached_property
    def padded_neighbors(self) -> np.ndarray:
        """Neighbour table of shape ``(n, max_degree)``, padded with -1."""
        width = max((len(a) for a in self.adjacency), default=0)
        table = np.full((self.n, max(width, 1)), -1, dtype=np.int64)
        for v, nbrs in enumerate(self.adjacency):
            table[v, : len(nbrs)] = nbrs
        return table


def graph_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a ``general`` graph from undirected 0-based edge pairs."""
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        adj[u].add(v)
        adj[v].add(u)
    return Graph(n, tuple(tuple(sorted(a)) for a in adj), kind="general")


def cycle_graph(n: int) -> Graph:
    """Cycle on ``n >= 3`` vertices, vertex ``i`` adjacent to ``i +- 1 mod n``."""
    if n < 3:
        raise InvalidSizeError(f"cycle needs n >= 3 (got {n}); smaller cycles are multigraphs")
    adjacency = tuple(tuple(sorted({(i - 1) % n, (i + 1) % n})) for i in range(n))
    return Graph(n, adjacency, kind="cycle")


def torus_index(i: int, j: int, side: int) -> int:
    return (i % side) * side + (j % side)


def torus_coords(v: int, side: int) -> tuple[int, int]:
    return divmod(v, side)


def torus_grid_graph(side: int) -> Graph:
    """Periodic square lattice of ``side x side`` vertices (row-major indexing)."""
    if side < 3:
        raise InvalidSizeError(f"torus needs side >= 3 (got {side}); smaller tori have parallel edges")
    adjacency = []
    for i in range(side):
        for j in range(side):
            nbrs = {
                torus_index(i + 1, j, side),
                torus_index(i - 1, j, side),
                torus_index(i, j + 1, side),
                torus_index(i, j - 1, side),
            }
            adjacency.append(tuple(sorted(nbrs)))
    return Graph(side * side, tuple(adjacency), kind="torus_grid", side=side)


@dataclass(frozen=True)
class MarkedSet:
    """Sorted set of marked vertices of an ``n``-vertex graph."""

    marked: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "marked", tuple(sorted(set(int(m) for m in self.marked))))
        for m in self.marked:
            if not 0 <= m < self.n:
                raise ValueError(f"marked vertex {m} out of range [0, {self.n})")

    @classmethod
    def from_one_based(cls, labels: Iterable[int], n: int) -> MarkedSet:
        labels = list(labels)
        for lab in labels:
            if not 1 <= lab <= n:
                raise ValueError(f"marked label {lab} out of range [1, {n}]")
        return cls(tuple(lab - 1 for lab in labels), n)

    @property
    def k(self) -> int:
        return len(self.marked)

    def one_based(self) -> list[int]:
        return [m + 1 for m in self.marked]

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[list(self.marked)] = True
        return out

    def __contains__(self, v: object) -> bool:
        return v in self.marked

    def __iter__(self):
        return iter(self.marked)

    def __len__(self) -> int:
        return len(self.marked)


@dataclass(frozen=True)
class StochasticMatrix:
    """
    Row-stochastic matrix in sparse row form with exact rational entries.

    ``rows[i]`` is a tuple of ``(column, probability)`` pairs sorted by column.
    Absorbing matrices keep a reference to the matrix they were derived from
    in ``base`` (the quantum walk's initial state and edge set depend on it)
    and the set of absorbing vertices in ``marked``.
    """

    n: int
    rows: tuple[tuple[tuple[int, Fraction], ...], ...]
    graph: Graph | None = None
    base: StochasticMatrix | None = None
    marked: MarkedSet | None = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ValueError("need exactly one row per state")
        absorbing = set(self.marked.marked) if self.marked is not None else set()
        for i, row in enumerate(self.rows):
            cols = [c for c, _ in row]
            if cols != sorted(set(cols)):
                raise ValueError(f"row {i} columns must be sorted and unique")
            total = Fraction(0)
            for c, p in row:
                if not 0 <= c < self.n:
                    raise ValueError(f"row {i} column {c} out of range")
                if not 0 < p <= 1:
                    raise ValueError(f"entry ({i}, {c}) = {p} not in (0, 1]")
                if self.graph is not None and c not in self.graph.adjacency[i]:
                    if not (c == i and i in absorbing):
                        raise ValueError(f"entry ({i}, {c}) is not an edge of the graph")
                total += p
            if abs(float(total) - 1.0) > 1e-12:
                raise ValueError(f"row {i} sums to {float(total)}, not 1")

    def entry(self, i: int, j: int) -> Fraction:
        for c, p in self.rows[i]:
            if c == j:
                return p
        return Fraction(0)

    def support(self) -> list[tuple[int, int]]:
        return [(i, c) for i, row in enumerate(self.rows) for c, _ in row]

    def absorbing_states(self) -> list[int]:
        """States whose row is the identity row."""
        return [i for i, row in enumerate(self.rows) if len(row) == 1 and row[0] == (i, 1)]

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for i, row in enumerate(self.rows):
            for c, p in row:
                out[i, c] = float(p)
        return out

    @cached_property
    def csr(self) -> sp.csr_matrix:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indices, data = [], []
        for i, row in enumerate(self.rows):
            indptr[i + 1] = indptr[i] + len(row)
            for c, p in row:
                indices.append(c)
                data.append(float(p))
        return sp.csr_matrix(
            (np.array(data, dtype=float), np.array(indices, dtype=np.int64), indptr),
            shape=(self.n, self.n),
        )


def transition_matrix(g: Graph) -> StochasticMatrix:
    """Simple random walk ``P[x, y] = 1/deg(x)`` for each neighbour ``y``."""
    rows = []
    for nbrs in g.adjacency:
        if not nbrs:
            raise ValueError("isolated vertex has no outgoing transitions")
        p = Fraction(1, len(nbrs))
        rows.append(tuple((y, p) for y in nbrs))
    return StochasticMatrix(g.n, tuple(rows), graph=g)


def absorbing_matrix(p: StochasticMatrix, m: MarkedSet) -> StochasticMatrix:
    """Replace the rows of marked states by identity rows."""
    if m.n != p.n:
        raise ValueError(f"marked set is for n={m.n}, matrix has n={p.n}")
    if m.k == 0:
        return p
    base = p.base if p.base is not None else p
    marked = set(m.marked)
    if p.marked is not None:
        marked |= set(p.marked.marked)
    rows = tuple(((i, Fraction(1)),) if i in marked else base.rows[i] for i in range(p.n))
    return StochasticMatrix(p.n, rows, graph=p.graph, base=base, marked=MarkedSet(tuple(marked), p.n))


@dataclass(frozen=True)
class EdgeBasis:
    """
    Lexicographically ordered directed pairs ``(x, y)`` spanning the walk.

    The pairs are the original directed edges plus one self-loop ``(i, i)``
    for each absorbing state ``i``.
    """

    pairs: tuple[tuple[int, int], ...]
    n: int
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if list(self.pairs) != sorted(set(self.pairs)):
            raise ValueError("edge basis must be sorted and duplicate-free")

    @cached_property
    def _index(self) -> dict[tuple[int, int], int]:
        return {pair: i for i, pair in enumerate(self.pairs)}

    def index_of(self, pair: tuple[int, int]) -> int:
        return self._index[tuple(pair)]

    def pair_at(self, i: int) -> tuple[int, int]:
        return self.pairs[i]

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in self._index

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=np.int64)

    @cached_property
    def y(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=np.int64)

    @cached_property
    def is_loop(self) -> np.ndarray:
        return self.x == self.y

    @cached_property
    def edge_positions(self) -> np.ndarray:
        """Indices of the non-loop pairs, in basis order."""
        return np.flatnonzero(~self.is_loop)


def edge_basis(pprime: StochasticMatrix) -> EdgeBasis:
    """Edge basis of the double cover for ``pprime``.

    Includes every pair in the support of ``pprime`` and of the matrix it was
    derived from, so marked vertices keep their original edges next to their
    self-loop.
    """
    support = set(pprime.support())
    if pprime.base is not None:
        support |= set(pprime.base.support())
    return EdgeBasis(tuple(sorted(support)), pprime.n)


def diagonal_marked_set(side: int) -> MarkedSet:
    """Main diagonal ``{(i, i)}`` of a ``side x side`` torus."""
    if side < 3:
        raise InvalidSizeError(f"torus needs side >= 3 (got {side})")
    return MarkedSet(tuple(torus_index(i, i, side) for i in range(side)), side * side)


@dataclass(frozen=True)
class ReductionMap:
    """Torus vertex ``(i, j)`` goes to class ``(i - j) mod side``."""

    side: int

    def __post_init__(self):
        if self.side < 3:
            raise InvalidSizeError(f"torus needs side >= 3 (got {self.side})")

    def class_of(self, i: int, j: int) -> int:
        return (i - j) % self.side

    @cached_property
    def classes(self) -> np.ndarray:
        """Class index of each torus vertex, row-major."""
        i, j = np.divmod(np.arange(self.side * self.side), self.side)
        return (i - j) % self.side

    def members(self, c: int) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.classes == c)]

    def quotient_graph(self) -> Graph:
        return cycle_graph(self.side)

    def quotient_marked(self) -> MarkedSet:
        return MarkedSet((0,), self.side)

    def aggregate(self, values: Sequence[float]) -> np.ndarray:
        """Sum a per-vertex torus vector over each class."""
        return np.bincount(self.classes, weights=np.asarray(values, dtype=float), minlength=self.side)


def grid_to_cycle_reduction(side: int) -> ReductionMap:
    return ReductionMap(side)
