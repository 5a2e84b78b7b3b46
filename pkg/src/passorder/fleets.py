"""Fleet construction helpers shared by tests, the CLI, and the simulator."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import Approach, LaneKey, Turn, VehicleRecord

__all__ = ["example_fleet", "random_fleet", "fleet_from_lanes", "ALL_LANES", "TWO_PHASE_LANES"]

ALL_LANES: tuple[LaneKey, ...] = tuple(
    (approach, turn) for approach in Approach for turn in Turn
)

# Left/straight movements only: the flows that actually compete for the
# intersection core (right turns cross nothing).
TWO_PHASE_LANES: tuple[LaneKey, ...] = tuple(
    lane for lane in ALL_LANES if lane[1] is not Turn.RIGHT
)


def fleet_from_lanes(
    lanes: Sequence[LaneKey],
    spacing: float = 20.0,
    start: float = 60.0,
) -> list[VehicleRecord]:
    """Build an arrival-ordered fleet from a lane sequence.

    Vehicle i+1 is placed ``spacing`` meters behind vehicle i so positions
    are consistent with arrival order both per lane and globally.
    """
    fleet = []
    rank: dict[LaneKey, int] = {}
    for i, lane in enumerate(lanes):
        r = rank.get(lane, 0)
        rank[lane] = r + 1
        fleet.append(
            VehicleRecord(
                index=i + 1,
                approach=lane[0],
                turn=lane[1],
                position=start + spacing * i,
                same_lane_rank=r,
            )
        )
    return fleet


def example_fleet() -> list[VehicleRecord]:
    """The six-vehicle reference scenario used by the golden checks.

    Vehicles 1 and 2 come from the east on the straight and left lanes,
    3 and 4 go straight from the south and west, and 5 and 6 queue on the
    northern straight lane.
    """
    return fleet_from_lanes(
        [
            (Approach.EAST, Turn.STRAIGHT),
            (Approach.EAST, Turn.LEFT),
            (Approach.SOUTH, Turn.STRAIGHT),
            (Approach.WEST, Turn.STRAIGHT),
            (Approach.NORTH, Turn.STRAIGHT),
            (Approach.NORTH, Turn.STRAIGHT),
        ]
    )


def random_fleet(
    rng: np.random.Generator,
    n: int,
    lanes: Sequence[LaneKey] = ALL_LANES,
    spacing: float = 20.0,
) -> list[VehicleRecord]:
    """Uniform random lane choice per arrival, deterministic under ``rng``."""
    choices = [lanes[int(k)] for k in rng.integers(0, len(lanes), size=n)]
    return fleet_from_lanes(choices, spacing=spacing)
