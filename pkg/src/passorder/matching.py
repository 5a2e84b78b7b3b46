"""Maximum cardinality matching on general graphs.

The solver is Edmonds' blossom algorithm in its classic contracted-base
formulation: repeated alternating-tree searches from each unmatched vertex,
with odd cycles collapsed onto their base vertex. Exploration order is
fully deterministic (ascending vertex indices, FIFO tree growth) so the
returned matching is reproducible, which the golden checks rely on.

``brute_force_matching`` is the independent verification oracle: exhaustive
recursion over all matchings, usable up to 16 vertices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Union

__all__ = ["Matching", "maximum_matching", "brute_force_matching"]

Edge = tuple[int, int]


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint edges."""

    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError("self-loops cannot be matched")
            if a in seen or b in seen:
                raise ValueError("matching has a vertex incident to two edges")
            seen.add(a)
            seen.add(b)

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(v for edge in self.edges for v in edge)

    def partner(self, vertex: int) -> int | None:
        for a, b in self.edges:
            if vertex == a:
                return b
            if vertex == b:
                return a
        return None


GraphLike = Union["object", tuple[int, Iterable[Edge]]]


def _normalize(graph: GraphLike) -> tuple[int, list[list[int]]]:
    """Accept a CoexistingUndirectedGraph or an (n, edges) pair."""
    if isinstance(graph, tuple):
        n, edges = graph
    else:
        n, edges = graph.n_vehicles, graph.edges
    adjacency: list[list[int]] = [[] for _ in range(n + 1)]
    for a, b in edges:
        if not (1 <= a <= n and 1 <= b <= n):
            raise ValueError(f"edge ({a}, {b}) out of vertex range 1..{n}")
        if a == b:
            raise ValueError("self-loops are not allowed")
        adjacency[a].append(b)
        adjacency[b].append(a)
    for nbrs in adjacency:
        nbrs.sort()
    return n, adjacency


def maximum_matching(graph: GraphLike) -> Matching:
    """Maximum cardinality matching over vertices 1..n.

    Runs one alternating-tree search per unmatched vertex; each search is
    O(V*E) with blossom contraction, well inside the polynomial budget the
    schedulers assume.
    """
    n, adjacency = _normalize(graph)
    match = [0] * (n + 1)  # 0 = unmatched sentinel

    def find_augmenting_path(root: int) -> bool:
        used = [False] * (n + 1)
        parent = [0] * (n + 1)
        base = list(range(n + 1))
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            marked = [False] * (n + 1)
            v = a
            while True:
                v = base[v]
                marked[v] = True
                if match[v] == 0:
                    break
                v = parent[match[v]]
            v = b
            while True:
                v = base[v]
                if marked[v]:
                    return v
                v = parent[match[v]]

        def mark_blossom(v: int, stem: int, child: int, in_blossom: list[bool]) -> None:
            while base[v] != stem:
                in_blossom[base[v]] = True
                in_blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adjacency[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != 0 and parent[match[to]] != 0):
                    # Odd cycle: contract the blossom onto its base.
                    stem = lca(v, to)
                    in_blossom = [False] * (n + 1)
                    mark_blossom(v, stem, to, in_blossom)
                    mark_blossom(to, stem, v, in_blossom)
                    for i in range(1, n + 1):
                        if in_blossom[base[i]]:
                            base[i] = stem
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == 0:
                    parent[to] = v
                    if match[to] == 0:
                        # Augment along the alternating path back to root.
                        u = to
                        while u != 0:
                            pv = parent[u]
                            next_u = match[pv]
                            match[u] = pv
                            match[pv] = u
                            u = next_u
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for root in range(1, n + 1):
        if match[root] == 0:
            find_augmenting_path(root)

    edges = frozenset(
        (v, match[v]) for v in range(1, n + 1) if match[v] > v
    )
    return Matching(edges)


def brute_force_matching(graph: GraphLike) -> int:
    """Exact maximum matching size by exhaustive recursion (|V| <= 16)."""
    n, adjacency = _normalize(graph)
    if n > 16:
        raise ValueError("brute force oracle is limited to 16 vertices")
    memo: dict[int, int] = {}

    def best_from(decided: int) -> int:
        v = 1
        while v <= n and decided >> v & 1:
            v += 1
        if v > n:
            return 0
        if decided in memo:
            return memo[decided]
        # Leaving v unmatched is always an option.
        best = best_from(decided | 1 << v)
        for w in adjacency[v]:
            if not decided >> w & 1:
                best = max(best, 1 + best_from(decided | 1 << v | 1 << w))
        memo[decided] = best
        return best

    return best_from(0)
