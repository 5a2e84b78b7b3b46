"""Passing-order schedulers over the conflict directed graph.

Three methods produce a rooted passing tree whose depth layers are the
groups of vehicles that cross simultaneously:

* ``dfst``      -- first-in-first-out baseline treating every conflict
                   uniformly: each vehicle goes one layer below its deepest
                   conflicting predecessor.
* ``opt_dfst``  -- still FIFO, but crossing conflicts only forbid sharing a
                   layer while in-lane precedence stays strict, so each
                   vehicle takes the smallest feasible depth.
* ``mm_schedule`` -- drops FIFO altogether: pairs co-passable vehicles via
                   maximum matching on the coexistence graph, orders the
                   resulting units by in-lane precedence, and slots
                   crossing-free vehicles into existing layers.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .graphs import CoexistingUndirectedGraph, ConflictDirectedGraph
from .matching import Matching, maximum_matching

__all__ = [
    "PassingSchedule",
    "Layering",
    "audit_schedule",
    "dfst",
    "opt_dfst",
    "find_opt_parent",
    "repair_infeasible_pairs",
    "spanning",
    "mm_schedule",
]

Pair = tuple[int, int]
Unit = tuple[int, ...]


@dataclass(frozen=True)
class PassingSchedule:
    """Rooted passing tree: parent links, depths, and repair metadata."""

    parent: Mapping[int, int]
    depth: Mapping[int, int]
    method: str = ""
    split_pairs: int = 0

    @property
    def max_depth(self) -> int:
        """Total number of passing layers (the tree's evacuation depth)."""
        return max(self.depth.values(), default=0)

    def layering(self) -> "Layering":
        by_depth: dict[int, list[int]] = {}
        for vehicle, d in self.depth.items():
            by_depth.setdefault(d, []).append(vehicle)
        return Layering(
            layers=tuple(
                tuple(sorted(by_depth[d])) for d in sorted(by_depth)
            )
        )

    def to_text(self) -> str:
        """Schedule exchange format: one `i parent depth` line per vehicle."""
        lines = [
            f"{i} {self.parent[i]} {self.depth[i]}" for i in sorted(self.depth)
        ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Layering:
    """Depth layers in passing order; each layer crosses simultaneously."""

    layers: tuple[tuple[int, ...], ...]

    def __iter__(self):
        return iter(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def as_sets(self) -> list[set[int]]:
        return [set(layer) for layer in self.layers]


def audit_schedule(
    schedule: PassingSchedule, cdg: ConflictDirectedGraph
) -> list[str]:
    """Structural checks every valid schedule must pass.

    Returns human-readable violation strings (empty when the schedule is
    sound): tree shape, depth arithmetic, in-lane precedence, and the
    same-depth coexistence property.
    """
    issues = []
    n = cdg.n_vehicles
    vehicles = set(range(1, n + 1))
    if set(schedule.depth) != vehicles or set(schedule.parent) != vehicles:
        issues.append("schedule does not cover exactly the vehicles 1..n")
        return issues

    depth_of = dict(schedule.depth)
    depth_of[0] = 0
    for v in sorted(vehicles):
        p = schedule.parent[v]
        if p not in depth_of:
            issues.append(f"vehicle {v}: unknown parent {p}")
            continue
        if depth_of[v] != depth_of[p] + 1:
            issues.append(
                f"vehicle {v}: depth {depth_of[v]} != parent depth {depth_of[p]} + 1"
            )
    # Parent links must reach the root without cycles.
    for v in sorted(vehicles):
        seen = set()
        cur = v
        while cur != 0:
            if cur in seen:
                issues.append(f"vehicle {v}: parent chain contains a cycle")
                break
            seen.add(cur)
            cur = schedule.parent.get(cur, 0)

    for i, j in sorted(cdg.uni_edges):
        if i == 0:
            continue
        if depth_of[i] >= depth_of[j]:
            issues.append(
                f"in-lane precedence violated: depth({i}) >= depth({j})"
            )

    by_depth: dict[int, list[int]] = {}
    for v in vehicles:
        by_depth.setdefault(depth_of[v], []).append(v)
    for d, members in sorted(by_depth.items()):
        members.sort()
        for a_idx in range(len(members)):
            for b_idx in range(a_idx + 1, len(members)):
                a, b = members[a_idx], members[b_idx]
                if cdg.in_conflict(a, b):
                    issues.append(
                        f"layer {d}: conflicting vehicles {a} and {b} share a depth"
                    )
    return issues


def _conflict_parent_sets(
    cdg: ConflictDirectedGraph, vehicle: int
) -> tuple[frozenset[int], frozenset[int]]:
    return cdg.diverging_parents(vehicle), cdg.crossing_parents(vehicle)


def dfst(cdg: ConflictDirectedGraph) -> PassingSchedule:
    """FIFO baseline: one layer below the deepest conflicting predecessor."""
    depth = {0: 0}
    parent: dict[int, int] = {}
    for i in range(1, cdg.n_vehicles + 1):
        candidates = sorted(cdg.conflict_parents(i))
        if not candidates:
            raise ValueError(f"vehicle {i} has no conflict parents; invalid CDG")
        best = max(candidates, key=lambda m: (depth[m], -m))
        parent[i] = best
        depth[i] = depth[best] + 1
    del depth[0]
    return PassingSchedule(parent=parent, depth=depth, method="dfst")


def find_opt_parent(
    depths: Mapping[int, int],
    candidates: Iterable[int],
    crossing: frozenset[int],
    diverging: frozenset[int],
) -> int:
    """Pick the parent that gives a vehicle its smallest feasible depth.

    The feasible depth must exceed every in-lane predecessor's depth and
    avoid the depths occupied by crossing-conflict predecessors. The
    returned anchor is the smallest-index vertex one layer above, with
    coexisting vertices preferred over crossing-conflicted ones.
    """
    pool = sorted(set(candidates))
    if not pool:
        return 0
    lane_floor = max((depths[m] for m in pool if m in diverging), default=0)
    blocked = {depths[m] for m in pool if m in crossing}
    target = lane_floor + 1
    while target in blocked:
        target += 1
    level = sorted(v for v, d in depths.items() if d == target - 1)
    for v in level:
        if v not in crossing:
            return v
    return level[0]


def opt_dfst(cdg: ConflictDirectedGraph) -> PassingSchedule:
    """FIFO scheduling with per-vehicle minimal feasible depth."""
    depth = {0: 0}
    parent: dict[int, int] = {}
    for i in range(1, cdg.n_vehicles + 1):
        diverging, crossing = _conflict_parent_sets(cdg, i)
        pool = diverging | crossing
        if not pool:
            raise ValueError(f"vehicle {i} has no conflict parents; invalid CDG")
        k = find_opt_parent(depth, pool, crossing, diverging)
        parent[i] = k
        depth[i] = depth[k] + 1
    del depth[0]
    return PassingSchedule(parent=parent, depth=depth, method="opt_dfst")


def _same_lane(cdg: ConflictDirectedGraph, a: int, b: int) -> bool:
    # Every same-lane pair carries a unidirectional edge, so lane identity
    # is recoverable from the CDG alone.
    lo, hi = (a, b) if a < b else (b, a)
    return (lo, hi) in cdg.uni_edges


def _ahead(cdg: ConflictDirectedGraph, a: int, b: int) -> bool:
    """True when a and b share a lane and a is in front."""
    return a < b and (a, b) in cdg.uni_edges


def repair_infeasible_pairs(
    pairs: Sequence[Pair],
    cdg: ConflictDirectedGraph,
    max_exchanges: int | None = None,
) -> list[Pair]:
    """Make an ordered pair sequence executable in its given order.

    Whenever a later pair holds a vehicle that must precede a member of an
    earlier pair (same lane, smaller rank), the two same-lane vehicles
    swap partners. Each exchange preserves cardinality and pair validity,
    because same-lane vehicles share a movement and therefore the same
    coexistence relations.
    """
    repaired = [tuple(sorted(p)) for p in pairs]
    Matching(frozenset(repaired))  # reject overlapping pairs early
    budget = cdg.n_vehicles if max_exchanges is None else max_exchanges
    exchanges = 0
    while exchanges <= budget:
        violation = None
        for a in range(len(repaired)):
            for b in range(a + 1, len(repaired)):
                for x in repaired[a]:
                    for y in repaired[b]:
                        if _ahead(cdg, y, x):
                            violation = (a, b, x, y)
                            break
                    if violation:
                        break
                if violation:
                    break
            if violation:
                break
        if violation is None:
            return repaired
        a, b, x, y = violation
        partner_x = repaired[a][0] if repaired[a][1] == x else repaired[a][1]
        partner_y = repaired[b][0] if repaired[b][1] == y else repaired[b][1]
        repaired[a] = tuple(sorted((partner_x, y)))
        repaired[b] = tuple(sorted((partner_y, x)))
        exchanges += 1
    return repaired


def _lane_roots(cdg: ConflictDirectedGraph) -> dict[int, int]:
    """Smallest vehicle index on each vehicle's lane, used as lane id."""
    roots: dict[int, int] = {}
    for v in range(1, cdg.n_vehicles + 1):
        root = v
        for u in range(1, v):
            if (u, v) in cdg.uni_edges:
                root = min(root, roots.get(u, u))
        roots[v] = root
    return roots


def _normalize_pair_groups(
    units: list[Unit], cdg: ConflictDirectedGraph
) -> None:
    """Re-pair each lane-class group order-preservingly.

    Pairs joining the same two lanes are rewired so that the k-th vehicle
    of one lane partners the k-th of the other; this is the canonical
    uncrossing that removes every precedence cycle confined to one group.
    """
    roots = _lane_roots(cdg)
    groups: dict[tuple[int, int], list[int]] = {}
    for idx, unit in enumerate(units):
        if len(unit) != 2:
            continue
        key = tuple(sorted((roots[unit[0]], roots[unit[1]])))
        groups.setdefault(key, []).append(idx)
    for (lane_a, _), indices in groups.items():
        if len(indices) < 2:
            continue
        side_a = sorted(
            v for idx in indices for v in units[idx] if roots[v] == lane_a
        )
        side_b = sorted(
            v for idx in indices for v in units[idx] if roots[v] != lane_a
        )
        for idx, a, b in zip(indices, side_a, side_b):
            units[idx] = tuple(sorted((a, b)))


def _unit_successors(
    units: Sequence[Unit], cdg: ConflictDirectedGraph
) -> list[list[int]]:
    succ: list[list[int]] = [[] for _ in units]
    for a in range(len(units)):
        for b in range(len(units)):
            if a == b:
                continue
            if any(_ahead(cdg, x, y) for x in units[a] for y in units[b]):
                succ[a].append(b)
    return succ


def _find_cycle(succ: Sequence[Sequence[int]]) -> list[int] | None:
    white, gray, black = 0, 1, 2
    color = [white] * len(succ)
    for start in range(len(succ)):
        if color[start] != white:
            continue
        color[start] = gray
        stack = [(start, iter(succ[start]))]
        path = [start]
        while stack:
            node, edges = stack[-1]
            advanced = False
            for nxt in edges:
                if color[nxt] == gray:
                    return path[path.index(nxt):]
                if color[nxt] == white:
                    color[nxt] = gray
                    stack.append((nxt, iter(succ[nxt])))
                    path.append(nxt)
                    advanced = True
                    break
            if not advanced:
                color[node] = black
                stack.pop()
                path.pop()
    return None


def _exchange_scan(
    units: list[Unit], cdg: ConflictDirectedGraph, budget: int
) -> None:
    """Bounded pairwise-exchange pass over the pair units in list order."""
    exchanges = 0
    while exchanges <= budget:
        violation = None
        pair_positions = [i for i, u in enumerate(units) if len(u) == 2]
        for ia in range(len(pair_positions)):
            for ib in range(ia + 1, len(pair_positions)):
                a, b = pair_positions[ia], pair_positions[ib]
                for x in units[a]:
                    for y in units[b]:
                        if _ahead(cdg, y, x):
                            violation = (a, b, x, y)
                            break
                    if violation:
                        break
                if violation:
                    break
            if violation:
                break
        if violation is None:
            return
        a, b, x, y = violation
        partner_x = units[a][0] if units[a][1] == x else units[a][1]
        partner_y = units[b][0] if units[b][1] == y else units[b][1]
        units[a] = tuple(sorted((partner_x, y)))
        units[b] = tuple(sorted((partner_y, x)))
        exchanges += 1


def _emission_rebuild(
    units: list[Unit], cdg: ConflictDirectedGraph
) -> list[Unit]:
    """Re-realize the unit multiset by always consuming lane heads.

    Keeps the number of pairs per lane-class and the singleton count per
    lane, but reassigns vehicles so every lane is consumed in rank order.
    The emission order is therefore feasible by construction, which makes
    this a cardinality-preserving escape from persistent precedence
    cycles.
    """
    roots = _lane_roots(cdg)
    queues: dict[int, list[int]] = {}
    for unit in units:
        for v in unit:
            queues.setdefault(roots[v], []).append(v)
    for queue in queues.values():
        queue.sort(reverse=True)  # pop() yields the lane head

    pair_counts: dict[tuple[int, int], int] = {}
    single_counts: dict[int, int] = {}
    for unit in units:
        if len(unit) == 2:
            key = tuple(sorted((roots[unit[0]], roots[unit[1]])))
            pair_counts[key] = pair_counts.get(key, 0) + 1
        else:
            single_counts[roots[unit[0]]] = single_counts.get(roots[unit[0]], 0) + 1

    rebuilt: list[Unit] = []
    while pair_counts or single_counts:
        candidates: list[tuple[bool, int, Unit, object]] = []
        for key in pair_counts:
            unit = tuple(sorted((queues[key[0]][-1], queues[key[1]][-1])))
            candidates.append((False, unit[0], unit, key))
        for lane in single_counts:
            unit = (queues[lane][-1],)
            candidates.append((True, unit[0], unit, lane))
        is_single, _, unit, key = min(candidates)
        rebuilt.append(unit)
        if is_single:
            queues[key].pop()
            single_counts[key] -= 1
            if single_counts[key] == 0:
                del single_counts[key]
        else:
            queues[key[0]].pop()
            queues[key[1]].pop()
            pair_counts[key] -= 1
            if pair_counts[key] == 0:
                del pair_counts[key]
    return rebuilt


def _order_units(
    units: list[Unit], cdg: ConflictDirectedGraph, max_exchanges: int
) -> tuple[list[Unit], int]:
    """Topologically order units by in-lane precedence.

    A precedence cycle first triggers the bounded exchange repair; if
    cycles persist the unit multiset is re-realized head-first (same
    cardinality), and only a pathological instance ever reaches the
    pair-splitting fallback.
    """
    splits = 0
    if _find_cycle(_unit_successors(units, cdg)) is not None:
        _normalize_pair_groups(units, cdg)
        _exchange_scan(units, cdg, max_exchanges)
        if _find_cycle(_unit_successors(units, cdg)) is not None:
            units[:] = _emission_rebuild(units, cdg)
    while True:
        cycle = _find_cycle(_unit_successors(units, cdg))
        if cycle is None:
            break
        victim = next((p for p in cycle if len(units[p]) == 2), None)
        if victim is None:
            raise RuntimeError("precedence cycle without any pair unit")
        a, b = units[victim]
        units[victim] = (a,)
        units.append((b,))
        splits += 1

    succ = _unit_successors(units, cdg)
    indegree = [0] * len(units)
    for a, targets in enumerate(succ):
        for b in targets:
            indegree[b] += 1
    # Pairs are released before singletons of equal standing; ties fall to
    # the smallest contained vehicle.
    ready = [
        (len(units[i]) == 1, units[i][0], i)
        for i in range(len(units))
        if indegree[i] == 0
    ]
    heapq.heapify(ready)
    ordered: list[Unit] = []
    while ready:
        _, _, idx = heapq.heappop(ready)
        ordered.append(units[idx])
        for nxt in succ[idx]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, (len(units[nxt]) == 1, units[nxt][0], nxt))
    if len(ordered) != len(units):
        raise RuntimeError("unit ordering failed after repair")
    return ordered, splits


def _insert_loose(
    layers: list[list[int]],
    loose: Sequence[int],
    cdg: ConflictDirectedGraph,
) -> None:
    """Slot crossing-free vehicles into the earliest compatible layer.

    The slot must come after every scheduled in-lane predecessor and
    before every scheduled in-lane successor; when no existing layer in
    that window coexists with the vehicle, a fresh layer is inserted.
    """
    for v in sorted(loose):
        lo = 0
        hi = len(layers) + 1
        for pos, layer in enumerate(layers, start=1):
            for u in layer:
                if _ahead(cdg, u, v):
                    lo = max(lo, pos)
                elif _ahead(cdg, v, u):
                    hi = min(hi, pos)
        placed = False
        for pos in range(lo + 1, min(hi, len(layers) + 1)):
            if all(not cdg.in_conflict(v, u) for u in layers[pos - 1]):
                layers[pos - 1].append(v)
                placed = True
                break
        if not placed:
            if hi > len(layers):
                layers.append([v])
            else:
                layers.insert(hi - 1, [v])


def _schedule_from_layers(
    layers: Sequence[Sequence[int]],
    cdg: ConflictDirectedGraph,
    method: str,
    split_pairs: int,
) -> PassingSchedule:
    depth: dict[int, int] = {}
    parent: dict[int, int] = {}
    previous: list[int] = []
    for pos, layer in enumerate(layers, start=1):
        for v in sorted(layer):
            depth[v] = pos
            if pos == 1:
                parent[v] = 0
                continue
            lane_preds = [u for u in previous if _ahead(cdg, u, v)]
            if lane_preds:
                parent[v] = min(lane_preds)
                continue
            coexisting = [u for u in previous if not cdg.in_conflict(u, v)]
            parent[v] = min(coexisting) if coexisting else min(previous)
        previous = sorted(layer)
    return PassingSchedule(
        parent=parent, depth=depth, method=method, split_pairs=split_pairs
    )


def mm_layers(
    cug: CoexistingUndirectedGraph,
    cdg: ConflictDirectedGraph,
    matchable: Callable[[int, int], bool] | None = None,
    max_exchanges: int | None = None,
) -> tuple[list[list[int]], int]:
    """Layer structure of the maximum-matching method.

    Vehicles without any crossing conflict are kept out of the matching
    (pairing them wastes capacity since they coexist with every other
    lane) and slotted greedily afterwards. Returns the ordered layers and
    the number of pairs that had to be split during repair.
    """
    n = cdg.n_vehicles
    engaged = [v for v in range(1, n + 1) if cdg.crossing_neighbors(v)]
    engaged_set = set(engaged)
    loose = [v for v in range(1, n + 1) if v not in engaged_set]

    edges = [
        (a, b)
        for a, b in sorted(cug.edges)
        if a in engaged_set
        and b in engaged_set
        and (matchable is None or matchable(a, b))
    ]
    matching = maximum_matching((n, edges))
    units: list[Unit] = sorted(matching.edges)
    matched = matching.covered
    units += [(v,) for v in engaged if v not in matched]

    budget = n if max_exchanges is None else max_exchanges
    ordered, splits = _order_units(units, cdg, budget)
    layers = [list(unit) for unit in ordered]
    _insert_loose(layers, loose, cdg)
    return layers, splits


def spanning(
    units: Sequence[Iterable[int]],
    cdg: ConflictDirectedGraph,
    loose: Sequence[int] = (),
    max_exchanges: int | None = None,
) -> PassingSchedule:
    """Complete a unit list (pairs plus singletons) into a passing tree."""
    normalized: list[Unit] = [tuple(sorted(set(u))) for u in units]
    covered = [v for unit in normalized for v in unit]
    if len(covered) != len(set(covered)):
        raise ValueError("units overlap")
    expected = set(range(1, cdg.n_vehicles + 1))
    if set(covered) | set(loose) != expected or set(covered) & set(loose):
        raise ValueError("units and loose vehicles must partition 1..n")
    budget = cdg.n_vehicles if max_exchanges is None else max_exchanges
    ordered, splits = _order_units(normalized, cdg, budget)
    layers = [list(unit) for unit in ordered]
    _insert_loose(layers, list(loose), cdg)
    return _schedule_from_layers(layers, cdg, method="mm", split_pairs=splits)


def mm_schedule(
    cug: CoexistingUndirectedGraph,
    cdg: ConflictDirectedGraph,
    matchable: Callable[[int, int], bool] | None = None,
) -> PassingSchedule:
    """Global passing order via maximum matching on the coexistence graph."""
    layers, splits = mm_layers(cug, cdg, matchable=matchable)
    return _schedule_from_layers(layers, cdg, method="mm", split_pairs=splits)
