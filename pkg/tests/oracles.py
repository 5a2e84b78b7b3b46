"""Independent verification oracles used across the test suite."""

from __future__ import annotations

from collections import deque

from shapely.geometry import LineString, Point

from passorder.geometry import IntersectionGeometry

_END_EPS = 1e-6


def shapely_crossing_pairs(geometry: IntersectionGeometry) -> frozenset[frozenset]:
    """Movement pairs whose paths share an interior point, via shapely.

    Independent of the package's exact segment arithmetic; endpoint
    touches are excluded just like the production classifier.
    """
    movements = geometry.movements
    keys = sorted(movements, key=lambda k: (k[0].value, k[1].value))
    lines = {key: LineString(movements[key].path) for key in keys}
    ends = {
        key: (Point(movements[key].path[0]), Point(movements[key].path[-1]))
        for key in keys
    }
    pairs = set()
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            hit = lines[a].intersection(lines[b])
            if hit.is_empty:
                continue
            points = []
            if hit.geom_type == "Point":
                points = [hit]
            elif hit.geom_type in ("MultiPoint", "GeometryCollection"):
                points = [g for g in hit.geoms if g.geom_type == "Point"]
            elif hit.geom_type in ("LineString", "MultiLineString"):
                pairs.add(frozenset((a, b)))
                continue
            endpoints = [*ends[a], *ends[b]]
            for p in points:
                if all(p.distance(e) > _END_EPS for e in endpoints):
                    pairs.add(frozenset((a, b)))
                    break
    return frozenset(pairs)


def min_feasible_layers(fleet, cdg) -> int:
    """Exact minimum layer count over all feasible layered partitions.

    Breadth-first search over per-lane consumption states; a layer is any
    non-empty pairwise-coexisting set of current lane heads. Exponential,
    intended for fleets of at most ~10 vehicles.
    """
    lanes: dict = {}
    for v in fleet:
        lanes.setdefault(v.lane, []).append(v.index)
    queues = [lanes[k] for k in sorted(lanes, key=lambda k: (k[0].value, k[1].value))]
    total = tuple(len(q) for q in queues)
    start = tuple(0 for _ in queues)
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        state, depth = frontier.popleft()
        if state == total:
            return depth
        heads = [
            (lane, queues[lane][state[lane]])
            for lane in range(len(queues))
            if state[lane] < total[lane]
        ]
        m = len(heads)
        for mask in range(1, 1 << m):
            chosen = [heads[i] for i in range(m) if mask >> i & 1]
            feasible = all(
                not cdg.in_conflict(chosen[i][1], chosen[j][1])
                for i in range(len(chosen))
                for j in range(i + 1, len(chosen))
            )
            if not feasible:
                continue
            advanced = list(state)
            for lane, _ in chosen:
                advanced[lane] += 1
            key = tuple(advanced)
            if key not in seen:
                seen.add(key)
                frontier.append((key, depth + 1))
    raise AssertionError("search space exhausted without covering the fleet")


def has_augmenting_path(n: int, edges, matching_edges) -> bool:
    """Exhaustive simple-alternating-path search (Berge's certificate)."""
    mate: dict[int, int] = {}
    for a, b in matching_edges:
        mate[a] = b
        mate[b] = a
    adjacency: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)

    def search(v: int, visited: frozenset[int], need_matched: bool) -> bool:
        for w in adjacency[v]:
            if w in visited:
                continue
            if need_matched:
                if mate.get(v) == w and search(w, visited | {w}, False):
                    return True
            else:
                if mate.get(v) == w:
                    continue
                if w not in mate:
                    return True
                if search(w, visited | {w}, True):
                    return True
        return False

    free = [v for v in range(1, n + 1) if v not in mate]
    return any(search(u, frozenset((u,)), False) for u in free)
