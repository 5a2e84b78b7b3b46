"""Input validation helpers for the estimator-facing API."""

from __future__ import annotations

from typing import Iterable, Sequence

from .geometry import Approach, Turn, VehicleRecord

__all__ = ["as_approach", "as_turn", "check_fleet"]

_APPROACH_ALIASES = {a.value: a for a in Approach}
_APPROACH_ALIASES.update({a.value[0]: a for a in Approach})
_TURN_ALIASES = {t.value: t for t in Turn}
_TURN_ALIASES.update({t.value[0]: t for t in Turn})


def as_approach(value: object) -> Approach:
    if isinstance(value, Approach):
        return value
    if isinstance(value, str):
        key = value.strip().lower()
        if key in _APPROACH_ALIASES:
            return _APPROACH_ALIASES[key]
    raise ValueError(f"not an approach: {value!r}")


def as_turn(value: object) -> Turn:
    if isinstance(value, Turn):
        return value
    if isinstance(value, str):
        key = value.strip().lower()
        if key in _TURN_ALIASES:
            return _TURN_ALIASES[key]
    raise ValueError(f"not a turn: {value!r}")


def check_fleet(X: Iterable[object], spacing: float = 20.0) -> tuple[VehicleRecord, ...]:
    """Normalize fleet input into arrival-ordered VehicleRecords.

    Accepts a sequence of VehicleRecord, of (approach, turn) pairs, or of
    (approach, turn, position) triples; rows are taken in arrival order.
    Positions default to a uniform stagger so that arrival order and road
    order agree.
    """
    rows = list(X)
    if not rows:
        return ()
    if all(isinstance(r, VehicleRecord) for r in rows):
        records = tuple(rows)
        _validate_records(records)
        return records

    fleet: list[VehicleRecord] = []
    rank: dict[tuple[Approach, Turn], int] = {}
    last_position: dict[tuple[Approach, Turn], float] = {}
    for i, row in enumerate(rows):
        if isinstance(row, VehicleRecord):
            raise ValueError("fleet rows must be all records or all tuples")
        parts = tuple(row)
        if len(parts) not in (2, 3):
            raise ValueError(
                f"row {i}: expected (approach, turn[, position]), got {row!r}"
            )
        approach = as_approach(parts[0])
        turn = as_turn(parts[1])
        lane = (approach, turn)
        r = rank.get(lane, 0)
        if len(parts) == 3:
            position = float(parts[2])
            if position <= last_position.get(lane, float("-inf")):
                raise ValueError(
                    f"row {i}: position must increase along the lane"
                )
        else:
            position = spacing * (i + 1)
        fleet.append(
            VehicleRecord(
                index=i + 1,
                approach=approach,
                turn=turn,
                position=position,
                same_lane_rank=r,
            )
        )
        rank[lane] = r + 1
        last_position[lane] = position
    return tuple(fleet)


def _validate_records(records: Sequence[VehicleRecord]) -> None:
    from .geometry import _check_fleet_order

    _check_fleet_order(records)
