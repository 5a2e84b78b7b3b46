"""Conflict directed graph and its coexistence complement.

The conflict directed graph (CDG) has one vertex per vehicle plus the
virtual leader 0. Unidirectional edges encode in-lane precedence
(diverging conflicts), bidirectional edges encode crossing conflicts whose
order may be swapped. The coexisting undirected graph (CUG) is the
complement on vertices 1..N: an edge means the two vehicles may pass the
intersection simultaneously.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .geometry import ConflictSets

__all__ = [
    "ConflictDirectedGraph",
    "CoexistingUndirectedGraph",
    "build_cdg",
    "build_cug",
    "has_rooted_spanning_tree",
]


@dataclass(frozen=True)
class ConflictDirectedGraph:
    """Immutable conflict graph over vertices {0, 1, .., n_vehicles}."""

    n_vehicles: int
    uni_edges: frozenset[tuple[int, int]]
    bi_edges: frozenset[tuple[int, int]]
    _uni_parents: Mapping[int, frozenset[int]] = field(repr=False, hash=False)
    _bi_adjacency: Mapping[int, frozenset[int]] = field(repr=False, hash=False)

    @property
    def vertices(self) -> range:
        return range(self.n_vehicles + 1)

    def diverging_parents(self, vehicle: int) -> frozenset[int]:
        """Vertices m with a unidirectional edge (m, vehicle)."""
        return self._uni_parents.get(vehicle, frozenset())

    def crossing_neighbors(self, vehicle: int) -> frozenset[int]:
        return self._bi_adjacency.get(vehicle, frozenset())

    def crossing_parents(self, vehicle: int) -> frozenset[int]:
        return frozenset(m for m in self.crossing_neighbors(vehicle) if m < vehicle)

    def conflict_parents(self, vehicle: int) -> frozenset[int]:
        """All smaller-index vertices adjacent through either edge kind."""
        return self.diverging_parents(vehicle) | self.crossing_parents(vehicle)

    def in_conflict(self, a: int, b: int) -> bool:
        """True when {a, b} carries a unidirectional or bidirectional edge."""
        if a == b:
            return False
        lo, hi = (a, b) if a < b else (b, a)
        return (lo, hi) in self.uni_edges or (lo, hi) in self.bi_edges

    def to_text(self) -> str:
        """Plain-text exchange format: header then `u i j` / `b i j` lines."""
        lines = [f"cdg {self.n_vehicles}"]
        lines += [f"u {i} {j}" for i, j in sorted(self.uni_edges)]
        lines += [f"b {i} {j}" for i, j in sorted(self.bi_edges)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CoexistingUndirectedGraph:
    """Complement of the CDG without vertex 0; edges mean co-passable."""

    n_vehicles: int
    edges: frozenset[tuple[int, int]]
    _adjacency: Mapping[int, frozenset[int]] = field(repr=False, hash=False)

    @property
    def vertices(self) -> range:
        return range(1, self.n_vehicles + 1)

    def neighbors(self, vehicle: int) -> frozenset[int]:
        return self._adjacency.get(vehicle, frozenset())

    def has_edge(self, a: int, b: int) -> bool:
        lo, hi = (a, b) if a < b else (b, a)
        return (lo, hi) in self.edges

    def to_text(self) -> str:
        lines = [f"cug {self.n_vehicles}"]
        lines += [f"e {i} {j}" for i, j in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def build_cdg(
    conflict_sets: Mapping[int, ConflictSets], n_vehicles: int
) -> ConflictDirectedGraph:
    """Assemble the CDG from per-vehicle conflict sets.

    Raises ValueError when any referenced index falls outside 0..n or a set
    references a non-smaller vehicle.
    """
    if n_vehicles < 0:
        raise ValueError("n_vehicles must be non-negative")
    if set(conflict_sets) != set(range(1, n_vehicles + 1)):
        raise ValueError("conflict sets must cover exactly the indices 1..n")
    uni = set()
    bi = set()
    uni_parents: dict[int, set[int]] = {}
    bi_adjacency: dict[int, set[int]] = {}
    for i in range(1, n_vehicles + 1):
        sets = conflict_sets[i]
        for m in sets.diverging:
            if not 0 <= m < i:
                raise ValueError(f"vehicle {i}: diverging member {m} out of range")
            uni.add((m, i))
            uni_parents.setdefault(i, set()).add(m)
        for m in sets.crossing:
            if not 1 <= m < i:
                raise ValueError(f"vehicle {i}: crossing member {m} out of range")
            bi.add((m, i))
            bi_adjacency.setdefault(i, set()).add(m)
            bi_adjacency.setdefault(m, set()).add(i)
    return ConflictDirectedGraph(
        n_vehicles=n_vehicles,
        uni_edges=frozenset(uni),
        bi_edges=frozenset(bi),
        _uni_parents={k: frozenset(v) for k, v in uni_parents.items()},
        _bi_adjacency={k: frozenset(v) for k, v in bi_adjacency.items()},
    )


def build_cug(cdg: ConflictDirectedGraph) -> CoexistingUndirectedGraph:
    """Exact complement of the CDG on vertices 1..N."""
    n = cdg.n_vehicles
    edges = set()
    adjacency: dict[int, set[int]] = {i: set() for i in range(1, n + 1)}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if not cdg.in_conflict(i, j):
                edges.add((i, j))
                adjacency[i].add(j)
                adjacency[j].add(i)
    return CoexistingUndirectedGraph(
        n_vehicles=n,
        edges=frozenset(edges),
        _adjacency={k: frozenset(v) for k, v in adjacency.items()},
    )


def has_rooted_spanning_tree(cdg: ConflictDirectedGraph) -> bool:
    """Every vertex is reachable from 0, crossing edges walkable both ways."""
    succ: dict[int, set[int]] = {v: set() for v in cdg.vertices}
    for i, j in cdg.uni_edges:
        succ[i].add(j)
    for i, j in cdg.bi_edges:
        succ[i].add(j)
        succ[j].add(i)
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == cdg.n_vehicles + 1
