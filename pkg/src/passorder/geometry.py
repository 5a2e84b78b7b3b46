"""Intersection geometry and pairwise vehicle conflict classification.

The intersection is a square box with four three-lane approaches under
right-hand traffic. Every (approach, turn) pair owns one dedicated lane, so
there are 12 movements in total. Turn paths are quarter-circle arcs around
the box corners, straights are chords; every movement has its own entry and
exit point on the box boundary, which is what rules converging conflicts out
of the scenario entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Approach",
    "Turn",
    "ConflictClass",
    "Movement",
    "VehicleRecord",
    "ConflictSets",
    "IntersectionGeometry",
    "canonical_movement_paths",
    "classify_conflict",
    "build_conflict_sets",
]

# Tolerance for the exact segment arithmetic; the canonical geometry keeps
# every true crossing ~0.5 m away from path endpoints, so this never decides
# a borderline case.
_EPS = 1e-9

# Quarter-circle turns are approximated by this many chords.
ARC_SEGMENTS = 16


class Approach(Enum):
    """Compass direction a vehicle enters the intersection from."""

    NORTH = "north"
    EAST = "east"
    SOUTH = "south"
    WEST = "west"


class Turn(Enum):
    LEFT = "left"
    STRAIGHT = "straight"
    RIGHT = "right"


class ConflictClass(Enum):
    """Pairwise conflict mode. Converging cannot occur with dedicated lanes."""

    CROSSING = "crossing"
    DIVERGING = "diverging"
    NONE = "none"


Point = tuple[float, float]
LaneKey = tuple[Approach, Turn]


@dataclass(frozen=True)
class Movement:
    """One of the 12 lane movements with its planar path across the box.

    Identity (equality, hashing) is the (approach, turn) pair; the path is
    carried data.
    """

    approach: Approach
    turn: Turn
    path: tuple[Point, ...] = field(compare=False, repr=False)

    @property
    def key(self) -> LaneKey:
        return (self.approach, self.turn)

    @property
    def length(self) -> float:
        """Arc length of the path inside the box."""
        return sum(
            math.dist(a, b) for a, b in zip(self.path, self.path[1:])
        )


@dataclass(frozen=True)
class VehicleRecord:
    """A vehicle inside the control zone.

    ``index`` is the arrival order at the control zone (1-based) and
    ``position`` is the remaining distance to the stop line in meters.
    ``same_lane_rank`` 0 marks the vehicle closest to the intersection on
    its lane.
    """

    index: int
    approach: Approach
    turn: Turn
    position: float
    same_lane_rank: int

    @property
    def lane(self) -> LaneKey:
        return (self.approach, self.turn)


@dataclass(frozen=True)
class ConflictSets:
    """Crossing and diverging predecessor sets of one vehicle.

    All members are strictly smaller vehicle indices; the diverging set may
    additionally contain the virtual leader 0 when the vehicle heads its
    lane.
    """

    crossing: frozenset[int]
    diverging: frozenset[int]

    def __post_init__(self) -> None:
        if self.crossing & self.diverging:
            raise ValueError("crossing and diverging sets must be disjoint")


def _rotate(point: Point, quarter_turns: int) -> Point:
    """Rotate a point by ``quarter_turns`` * 90 degrees counterclockwise."""
    x, y = point
    for _ in range(quarter_turns % 4):
        x, y = -y, x
    return (x, y)


def _arc(center: Point, radius: float, theta0: float, theta1: float) -> list[Point]:
    cx, cy = center
    points = []
    for k in range(ARC_SEGMENTS + 1):
        theta = theta0 + (theta1 - theta0) * k / ARC_SEGMENTS
        points.append((cx + radius * math.cos(theta), cy + radius * math.sin(theta)))
    return points


def _south_paths(box_size: float) -> dict[Turn, list[Point]]:
    """Paths for the approach entering at the south edge, heading north.

    Incoming lanes sit on the east half of the road (right-hand traffic):
    the left-turn lane is innermost, the right-turn lane outermost.
    """
    half = box_size / 2.0
    w = box_size / 6.0
    return {
        Turn.STRAIGHT: [(1.5 * w, -half), (1.5 * w, half)],
        # Tight arc around the south-east corner into the eastbound exit.
        Turn.RIGHT: _arc((half, -half), 0.5 * w, math.pi, math.pi / 2.0),
        # Wide arc around the south-west corner into the westbound exit.
        Turn.LEFT: _arc((-half, -half), 3.5 * w, 0.0, math.pi / 2.0),
    }


# Quarter turns (counterclockwise) mapping the south-approach frame onto
# each approach.
_QUARTER_TURNS = {
    Approach.SOUTH: 0,
    Approach.EAST: 1,
    Approach.NORTH: 2,
    Approach.WEST: 3,
}


def _segment_intersections(
    a1: Point, a2: Point, b1: Point, b2: Point
) -> list[Point]:
    """Intersection points of two closed segments (0, 1, or 2 for overlap)."""
    ax, ay = a2[0] - a1[0], a2[1] - a1[1]
    bx, by = b2[0] - b1[0], b2[1] - b1[1]
    denom = ax * by - ay * bx
    rx, ry = b1[0] - a1[0], b1[1] - a1[1]
    if abs(denom) <= _EPS:
        # Parallel; collinear overlap would mean shared lane geometry,
        # which distinct canonical movements never produce.
        if abs(rx * ay - ry * ax) > _EPS:
            return []
        # Collinear: project b's endpoints onto a.
        along = ax * ax + ay * ay
        if along <= _EPS:
            return []
        hits = []
        for p in (b1, b2):
            t = ((p[0] - a1[0]) * ax + (p[1] - a1[1]) * ay) / along
            if -_EPS <= t <= 1.0 + _EPS:
                hits.append(p)
        for p in (a1, a2):
            s = bx * bx + by * by
            if s <= _EPS:
                continue
            u = ((p[0] - b1[0]) * bx + (p[1] - b1[1]) * by) / s
            if -_EPS <= u <= 1.0 + _EPS:
                hits.append(p)
        return hits
    t = (rx * by - ry * bx) / denom
    u = (rx * ay - ry * ax) / denom
    if -_EPS <= t <= 1.0 + _EPS and -_EPS <= u <= 1.0 + _EPS:
        return [(a1[0] + t * ax, a1[1] + t * ay)]
    return []


def _paths_cross(path_a: Sequence[Point], path_b: Sequence[Point]) -> bool:
    """True when the two polylines meet at a point interior to both.

    Points within tolerance of either polyline's global endpoints are
    ignored: a touch at an entry/exit point is not a crossing conflict.
    """
    ends = (path_a[0], path_a[-1], path_b[0], path_b[-1])
    for i in range(len(path_a) - 1):
        for j in range(len(path_b) - 1):
            for p in _segment_intersections(
                path_a[i], path_a[i + 1], path_b[j], path_b[j + 1]
            ):
                if all(math.dist(p, e) > _EPS for e in ends):
                    return True
    return False


def _path_is_simple(path: Sequence[Point]) -> bool:
    """No self-intersection besides consecutive segments sharing a vertex."""
    n = len(path) - 1
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1 and path[0] == path[-1]:
                continue
            hits = _segment_intersections(path[i], path[i + 1], path[j], path[j + 1])
            for p in hits:
                if math.dist(p, path[i + 1]) > _EPS and math.dist(p, path[j]) > _EPS:
                    return False
    return True


class IntersectionGeometry:
    """Canonical 12-movement geometry for a square intersection box.

    Builds all movement paths once and caches the pairwise crossing
    relation, which the conflict classification queries in O(1).
    """

    def __init__(self, box_size: float = 20.0):
        if box_size <= 0:
            raise ValueError("box_size must be positive")
        self.box_size = float(box_size)
        self._movements: dict[LaneKey, Movement] = {}
        base = _south_paths(self.box_size)
        for approach, quarter in _QUARTER_TURNS.items():
            for turn, path in base.items():
                rotated = tuple(_rotate(p, quarter) for p in path)
                self._movements[(approach, turn)] = Movement(approach, turn, rotated)
        self._validate_paths()
        self._crossing: frozenset[frozenset[LaneKey]] = self._build_crossing_pairs()

    def _validate_paths(self) -> None:
        half = self.box_size / 2.0
        entries: list[Point] = []
        exits: list[Point] = []
        for movement in self._movements.values():
            path = movement.path
            for endpoint in (path[0], path[-1]):
                if abs(max(abs(endpoint[0]), abs(endpoint[1])) - half) > 1e-6:
                    raise ValueError(
                        f"{movement.key}: path endpoint {endpoint} is not on the box boundary"
                    )
            if not _path_is_simple(path):
                raise ValueError(f"{movement.key}: path is self-intersecting")
            entries.append(path[0])
            exits.append(path[-1])
        # A shared exit point would be a converging conflict, which the
        # scenario excludes by construction; treat it as invalid input.
        for points, label in ((entries, "entry"), (exits, "exit")):
            for i in range(len(points)):
                for j in range(i + 1, len(points)):
                    if math.dist(points[i], points[j]) <= _EPS:
                        raise ValueError(f"two movements share an {label} point")

    def _build_crossing_pairs(self) -> frozenset[frozenset[LaneKey]]:
        keys = sorted(self._movements, key=lambda k: (k[0].value, k[1].value))
        pairs = set()
        for i, a in enumerate(keys):
            for b in keys[i + 1 :]:
                if _paths_cross(self._movements[a].path, self._movements[b].path):
                    pairs.add(frozenset((a, b)))
        return frozenset(pairs)

    @property
    def movements(self) -> Mapping[LaneKey, Movement]:
        return dict(self._movements)

    @property
    def crossing_pairs(self) -> frozenset[frozenset[LaneKey]]:
        """Unordered movement pairs whose paths cross inside the box."""
        return self._crossing

    def movement(self, approach: Approach, turn: Turn) -> Movement:
        return self._movements[(approach, turn)]

    def movements_cross(self, a: LaneKey, b: LaneKey) -> bool:
        return frozenset((a, b)) in self._crossing

    def path_length(self, lane: LaneKey) -> float:
        return self._movements[lane].length


_DEFAULT_GEOMETRY: IntersectionGeometry | None = None


def default_geometry() -> IntersectionGeometry:
    global _DEFAULT_GEOMETRY
    if _DEFAULT_GEOMETRY is None:
        _DEFAULT_GEOMETRY = IntersectionGeometry()
    return _DEFAULT_GEOMETRY


def canonical_movement_paths(
    box_size: float = 20.0,
) -> dict[LaneKey, tuple[Point, ...]]:
    """The 12 fixed movement paths for a given box side length."""
    geometry = (
        default_geometry() if box_size == 20.0 else IntersectionGeometry(box_size)
    )
    return {key: mov.path for key, mov in geometry.movements.items()}


def classify_conflict(
    a: VehicleRecord,
    b: VehicleRecord,
    geometry: IntersectionGeometry | None = None,
) -> ConflictClass:
    """Conflict mode of two distinct vehicles.

    Same lane means diverging (strict in-lane precedence); otherwise the
    pair is crossing exactly when their movement paths intersect at an
    interior point. Symmetric in its arguments.
    """
    if a.index == b.index:
        raise ValueError("conflict classification needs two distinct vehicles")
    if a.lane == b.lane:
        return ConflictClass.DIVERGING
    geometry = geometry or default_geometry()
    if geometry.movements_cross(a.lane, b.lane):
        return ConflictClass.CROSSING
    return ConflictClass.NONE


def build_conflict_sets(
    vehicles: Sequence[VehicleRecord],
    geometry: IntersectionGeometry | None = None,
) -> dict[int, ConflictSets]:
    """Crossing/diverging sets for every vehicle, frozen at control-zone entry.

    Vehicles must be given in index order; each set only ever references
    smaller indices, and the virtual leader 0 joins the diverging set of
    every lane-head vehicle.
    """
    geometry = geometry or default_geometry()
    _check_fleet_order(vehicles)
    sets: dict[int, ConflictSets] = {}
    for pos, vehicle in enumerate(vehicles):
        crossing = set()
        diverging = set()
        for other in vehicles[:pos]:
            mode = classify_conflict(vehicle, other, geometry)
            if mode is ConflictClass.CROSSING:
                crossing.add(other.index)
            elif mode is ConflictClass.DIVERGING:
                diverging.add(other.index)
        if vehicle.same_lane_rank == 0:
            diverging.add(0)
        sets[vehicle.index] = ConflictSets(frozenset(crossing), frozenset(diverging))
    return sets


def _check_fleet_order(vehicles: Iterable[VehicleRecord]) -> None:
    seen: set[int] = set()
    last = 0
    lane_rank: dict[LaneKey, int] = {}
    lane_position: dict[LaneKey, float] = {}
    for vehicle in vehicles:
        if vehicle.index in seen:
            raise ValueError(f"duplicate vehicle index {vehicle.index}")
        if vehicle.index <= 0:
            raise ValueError("vehicle indices are 1-based positive integers")
        if vehicle.index < last:
            raise ValueError("vehicles must be sorted by index")
        seen.add(vehicle.index)
        last = vehicle.index
        expected_rank = lane_rank.get(vehicle.lane, 0)
        if vehicle.same_lane_rank != expected_rank:
            raise ValueError(
                f"vehicle {vehicle.index}: same_lane_rank {vehicle.same_lane_rank} "
                f"does not match arrival order on its lane (expected {expected_rank})"
            )
        if vehicle.lane in lane_position and vehicle.position <= lane_position[vehicle.lane]:
            raise ValueError(
                f"vehicle {vehicle.index}: position must increase with lane rank"
            )
        lane_rank[vehicle.lane] = expected_rank + 1
        lane_position[vehicle.lane] = vehicle.position
