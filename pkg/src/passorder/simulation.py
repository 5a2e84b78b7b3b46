"""Discrete-time virtual-platoon simulation of a passing schedule.

Vehicles from all lanes are projected onto one virtual lane whose origin
is the stop line. A virtual leader moves at constant cruise speed; vehicle
i tracks the slot one following-gap per depth layer behind the leader with
a PID law on the spacing error plus velocity feed-forward. Inside the
intersection box vehicles clear at full acceleration, which keeps
consecutive layers strictly separated.

Scheduling is dynamic: conflict sets freeze when a vehicle enters the
control zone, the FIFO methods extend their solution incrementally, and
the matching method re-solves the unlocked population on every arrival.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, TextIO

import numpy as np

from .fleets import ALL_LANES
from .geometry import (
    IntersectionGeometry,
    LaneKey,
    VehicleRecord,
    default_geometry,
)
from .graphs import build_cdg, build_cug
from .geometry import ConflictSets
from .schedulers import dfst, mm_layers, mm_schedule, opt_dfst

__all__ = [
    "SimConfig",
    "ArrivalModel",
    "VehicleState",
    "SimMetrics",
    "SafetyViolationError",
    "virtual_position",
    "controller_step",
    "simulate",
]

SCHEDULER_NAMES = ("dfst", "opt_dfst", "mm")


class SafetyViolationError(RuntimeError):
    """Two conflicting vehicles occupied the intersection box together."""


@dataclass(frozen=True)
class SimConfig:
    """Plant, controller, and coordination parameters.

    ``max_speed`` bounds the catch-up speed above cruise (a bare double
    integrator would otherwise chase distant slots at unbounded speed) and
    ``lock_distance`` freezes a vehicle's layer once it is close enough
    that re-scheduling could no longer be tracked down to the contracted
    spacing error before entry.
    """

    control_zone: float = 1000.0
    desired_gap: float = 20.0
    desired_speed: float = 10.0
    dt: float = 0.05
    kp: float = 0.45
    ki: float = 0.0
    kd: float = 1.2
    max_accel: float = 3.0
    horizon: int = 200_000
    max_speed: float | None = None
    lock_distance: float = 150.0
    spawn_gap: float = 10.0
    arrival_period: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "control_zone",
            "desired_gap",
            "desired_speed",
            "dt",
            "max_accel",
            "spawn_gap",
            "arrival_period",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.dt > 0.1:
            raise ValueError("dt must not exceed 0.1 s")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.max_speed is not None and self.max_speed < self.desired_speed:
            raise ValueError("max_speed must be at least desired_speed")

    @property
    def catch_up_speed(self) -> float:
        return 1.5 * self.desired_speed if self.max_speed is None else self.max_speed

    @property
    def settle_time(self) -> float:
        """Time for a capped catch-up transient to decay below ~0.1 m.

        The closed loop contracts errors at roughly kd/2 per second; six
        time constants flatten even a full-speed overshoot.
        """
        return 12.0 / self.kd if self.kd > 0 else 6.0 / max(self.kp, 0.05)


@dataclass(frozen=True)
class ArrivalModel:
    """Per-lane Bernoulli arrivals, one trial per lane per period."""

    probability: float
    seed: int
    n_total: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if self.n_total < 0:
            raise ValueError("n_total must be non-negative")


@dataclass
class VehicleState:
    """Longitudinal state on the virtual lane (0 = stop line)."""

    position: float
    velocity: float
    acceleration: float = 0.0


@dataclass(frozen=True)
class SimMetrics:
    """Result record; bit-identical for identical seed and config.

    ``entry_error_max`` is the largest slot-tracking error observed at the
    moment a vehicle crossed the stop line; ``sync_gap_max`` the largest
    virtual-lane spread between same-layer vehicles at such a moment.
    """

    scheduler: str
    n_vehicles: int
    evacuation_time: float
    max_depth: int
    travel_times: Mapping[int, float]
    safety_violations: int = 0
    seed: int | None = None
    entry_error_max: float = 0.0
    sync_gap_max: float = 0.0

    def to_flat_dict(self) -> dict[str, object]:
        times = list(self.travel_times.values())
        return {
            "scheduler": self.scheduler,
            "n_vehicles": self.n_vehicles,
            "evacuation_time_s": round(self.evacuation_time, 6),
            "d_all": self.max_depth,
            "safety_violations": self.safety_violations,
            "seed": self.seed,
            "travel_time_mean_s": round(float(np.mean(times)), 6) if times else 0.0,
            "travel_time_max_s": round(float(np.max(times)), 6) if times else 0.0,
            "entry_error_max_m": round(self.entry_error_max, 6),
            "sync_gap_max_m": round(self.sync_gap_max, 6),
        }


def virtual_position(
    depth_of: Mapping[int, int] | "object",
    vehicle: int,
    leader_position: float,
    desired_gap: float,
) -> float:
    """Slot a scheduled vehicle must hold on the virtual lane."""
    depths = getattr(depth_of, "depth", depth_of)
    if vehicle not in depths:
        raise ValueError(f"vehicle {vehicle} has no assigned depth")
    return leader_position - depths[vehicle] * desired_gap


def controller_step(
    state: VehicleState,
    target_position: float,
    target_velocity: float,
    config: SimConfig,
    error_integral: float = 0.0,
) -> tuple[float, float]:
    """One PID evaluation; returns (saturated command, new integral)."""
    error = target_position - state.position
    integral = error_integral + error * config.dt
    rate = target_velocity - state.velocity
    command = config.kp * error + config.ki * integral + config.kd * rate
    command = max(-config.max_accel, min(config.max_accel, command))
    return command, integral


@dataclass
class _Body:
    """Book-keeping for one spawned vehicle."""

    index: int
    lane_id: int
    crossing: frozenset[int]
    lane_preds: tuple[int, ...]
    spawn_time: float
    rank: int


class _World:
    """Mutable simulation state shared by the policies below."""

    def __init__(
        self,
        scheduler: str,
        config: SimConfig,
        geometry: IntersectionGeometry,
        capacity: int,
    ):
        self.scheduler = scheduler
        self.config = config
        self.geometry = geometry
        self.lanes = list(ALL_LANES)
        self.lane_index = {lane: i for i, lane in enumerate(self.lanes)}
        self.path_len = np.array(
            [geometry.path_length(lane) for lane in self.lanes]
        )
        keys = self.lanes
        self.cross = np.zeros((len(keys), len(keys)), dtype=bool)
        for i, a in enumerate(keys):
            for j, b in enumerate(keys):
                if i != j and geometry.movements_cross(a, b):
                    self.cross[i, j] = True

        self.bodies: list[_Body] = []
        self.pos = np.zeros(capacity)
        self.vel = np.zeros(capacity)
        self.ierr = np.zeros(capacity)
        self.depth = np.zeros(capacity, dtype=np.int64)
        self.lane_of = np.zeros(capacity, dtype=np.int64)
        self.active = np.zeros(capacity, dtype=bool)
        self.exit_time = np.full(capacity, np.nan)
        self.spawn_time = np.full(capacity, np.nan)
        self.n = 0
        self.leader_anchor: float | None = None  # time of first spawn
        self.leader_start = -(config.control_zone + config.desired_gap)

    def leader_position(self, t: float) -> float:
        if self.leader_anchor is None:
            return self.leader_start
        return self.leader_start + self.config.desired_speed * (t - self.leader_anchor)

    def entry_time(self, depth: int) -> float:
        """Time the given layer's slot reaches the stop line."""
        anchor = 0.0 if self.leader_anchor is None else self.leader_anchor
        return anchor + (
            depth * self.config.desired_gap - self.leader_start
        ) / self.config.desired_speed

    def min_reachable_depth(self, vehicle: int, t: float) -> int:
        """Earliest layer the vehicle can still catch at bounded speed.

        Includes the controller settle margin so a floored vehicle is on
        its slot, converged, before the layer reaches the stop line.
        """
        distance = max(0.0, -self.pos[vehicle - 1])
        arrival = (
            t
            + distance / (0.95 * self.config.catch_up_speed)
            + self.config.settle_time
        )
        anchor = 0.0 if self.leader_anchor is None else self.leader_anchor
        d = (
            (arrival - anchor) * self.config.desired_speed + self.leader_start
        ) / self.config.desired_gap
        return max(1, math.ceil(d - 1e-9))

    def spawn(self, lane: LaneKey, position: float, t: float) -> int:
        index = self.n + 1
        lane_id = self.lane_index[lane]
        crossing = set()
        lane_preds = []
        for body in self.bodies:
            if not self.active[body.index - 1]:
                continue
            if body.lane_id == lane_id:
                lane_preds.append(body.index)
            elif self.cross[lane_id, body.lane_id]:
                crossing.add(body.index)
        body = _Body(
            index=index,
            lane_id=lane_id,
            crossing=frozenset(crossing),
            lane_preds=tuple(sorted(lane_preds)),
            spawn_time=t,
            rank=len(lane_preds),
        )
        self.bodies.append(body)
        i = index - 1
        self.n = index
        self.pos[i] = position
        self.vel[i] = self.config.desired_speed
        self.lane_of[i] = lane_id
        self.active[i] = True
        self.spawn_time[i] = t
        if self.leader_anchor is None:
            self.leader_anchor = t
        return index


def _assign_fifo_depth(
    world: _World, vehicle: int, optimized: bool, t: float
) -> None:
    """Incremental FIFO depth, floored at the physically reachable layer.

    Matches a full static re-solve whenever the floor is slack (the dense
    acceptance scenarios); under sparse arrivals the floor keeps a late
    vehicle from being assigned a layer whose slot already passed. Raising
    only the newcomer's depth preserves the FIFO stability property, and
    every conflicting predecessor sits strictly below the raised layer, so
    same-depth coexistence is untouched.
    """
    body = world.bodies[vehicle - 1]
    depth = world.depth
    floor = world.min_reachable_depth(vehicle, t)
    if optimized:
        lane_floor = max((depth[m - 1] for m in body.lane_preds), default=0)
        blocked = {int(depth[m - 1]) for m in body.crossing}
        d = max(int(lane_floor) + 1, floor)
        while d in blocked:
            d += 1
    else:
        parents = list(body.lane_preds) + sorted(body.crossing)
        d = max(
            1 + max((int(depth[m - 1]) for m in parents), default=0), floor
        )
    world.depth[vehicle - 1] = d


def _resolve_matching(world: _World, t: float) -> None:
    """Re-solve the unlocked population with the matching method.

    Locked vehicles (inside the lock radius, inside the box, or whose
    layer already started crossing) keep their depth; fresh layers are
    appended behind both the locked layers and the layers the virtual
    leader has already pulled past the stop line. Pairs are only formed
    between vehicles close enough to close their gap at catch-up speed.
    """
    cfg = world.config
    leader = world.leader_position(t)
    begun = int(math.floor(leader / cfg.desired_gap)) if leader > 0 else 0

    unlocked: list[int] = []
    locked_max = 0
    for body in world.bodies:
        i = body.index - 1
        if not world.active[i]:
            locked_max = max(locked_max, int(world.depth[i]))
            continue
        locked = (
            world.pos[i] >= -cfg.lock_distance
            or (world.depth[i] > 0 and leader - world.depth[i] * cfg.desired_gap >= 0)
        )
        if locked:
            locked_max = max(locked_max, int(world.depth[i]))
        else:
            unlocked.append(body.index)
    if not unlocked:
        return
    base = max(locked_max, begun)

    relabel = {v: k + 1 for k, v in enumerate(unlocked)}
    members = set(unlocked)
    conflict_sets = {}
    for v in unlocked:
        body = world.bodies[v - 1]
        crossing = frozenset(relabel[m] for m in body.crossing if m in members)
        lane_preds = [relabel[m] for m in body.lane_preds if m in members]
        diverging = set(lane_preds)
        if not lane_preds:
            diverging.add(0)
        conflict_sets[relabel[v]] = ConflictSets(crossing, frozenset(diverging))
    cdg = build_cdg(conflict_sets, len(unlocked))
    cug = build_cug(cdg)

    def matchable(a: int, b: int) -> bool:
        va, vb = unlocked[a - 1], unlocked[b - 1]
        pa, pb = world.pos[va - 1], world.pos[vb - 1]
        lead_dist = max(0.0, -max(pa, pb))
        window = (
            0.8
            * (cfg.catch_up_speed - cfg.desired_speed)
            * lead_dist
            / cfg.desired_speed
        )
        return abs(pa - pb) <= window

    layers, _ = mm_layers(cug, cdg, matchable=matchable)
    depth = base
    for layer in layers:
        originals = [unlocked[local - 1] for local in layer]
        floor = max(world.min_reachable_depth(v, t) for v in originals)
        depth = max(depth + 1, floor)
        for v in originals:
            world.depth[v - 1] = depth


def _audit_box(world: _World, t: float) -> None:
    inside = np.flatnonzero(
        world.active[: world.n]
        & (world.pos[: world.n] >= 0.0)
        & (world.pos[: world.n] < world.path_len[world.lane_of[: world.n]])
    )
    for a_pos in range(len(inside)):
        for b_pos in range(a_pos + 1, len(inside)):
            a, b = int(inside[a_pos]), int(inside[b_pos])
            la, lb = world.lane_of[a], world.lane_of[b]
            if la == lb or world.cross[la, lb]:
                raise SafetyViolationError(
                    f"t={t:.2f}s: vehicles {a + 1} and {b + 1} share the "
                    f"intersection box with a conflict (depths "
                    f"{world.depth[a]} and {world.depth[b]})"
                )


def simulate(
    scheduler: str,
    fleet: Sequence[VehicleRecord] | None = None,
    arrivals: ArrivalModel | None = None,
    config: SimConfig | None = None,
    geometry: IntersectionGeometry | None = None,
    trajectory: TextIO | None = None,
    log_every: int = 10,
    fleet_out: list[VehicleRecord] | None = None,
) -> SimMetrics:
    """Run one seeded simulation and return its metrics.

    Exactly one of ``fleet`` (pre-placed vehicles, single static solve) or
    ``arrivals`` (stochastic spawning with dynamic re-solves) must be
    given. A conflict-region co-occupancy raises SafetyViolationError:
    that is a scheduler bug, not a recoverable state. When ``fleet_out``
    is passed, the realized arrival-ordered fleet is appended to it.
    """
    if scheduler not in SCHEDULER_NAMES:
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if (fleet is None) == (arrivals is None):
        raise ValueError("exactly one of fleet or arrivals is required")
    config = config or SimConfig()
    geometry = geometry or default_geometry()

    capacity = len(fleet) if fleet is not None else arrivals.n_total
    world = _World(scheduler, config, geometry, capacity)
    if trajectory is not None:
        trajectory.write("t,vehicle,lane,pos,vel,depth\n")

    rng = np.random.default_rng(arrivals.seed) if arrivals is not None else None
    pending: list[int] = [0] * len(world.lanes)
    drawn = 0

    if fleet is not None:
        for record in fleet:
            world.spawn(record.lane, -record.position, 0.0)
        if world.n:
            _static_solve(world)
            # Anchor the leader so the closest vehicle starts on its slot.
            offsets = [
                world.pos[i] + world.depth[i] * config.desired_gap
                for i in range(world.n)
            ]
            world.leader_start = min(offsets) - config.desired_gap
            world.leader_anchor = 0.0
    total_to_spawn = capacity if arrivals is not None else world.n

    steps_per_slot = max(1, round(config.arrival_period / config.dt))
    if trajectory is not None and log_every <= 0:
        raise ValueError("log_every must be positive")

    entry_error_max = 0.0
    sync_gap_max = 0.0
    step = 0
    while True:
        t = step * config.dt
        if step > config.horizon:
            raise RuntimeError(
                f"simulation exceeded horizon of {config.horizon} steps"
            )

        spawned_now = False
        if arrivals is not None:
            if step % steps_per_slot == 0 and drawn < total_to_spawn:
                for lane_id in range(len(world.lanes)):
                    if drawn >= total_to_spawn:
                        break
                    if rng.random() < arrivals.probability:
                        pending[lane_id] += 1
                        drawn += 1
            for lane_id, count in enumerate(pending):
                if count == 0:
                    continue
                gate = -(config.control_zone - config.spawn_gap)
                occupied = any(
                    world.active[i]
                    and world.lane_of[i] == lane_id
                    and world.pos[i] <= gate
                    for i in range(world.n)
                )
                if occupied:
                    continue
                index = world.spawn(world.lanes[lane_id], -config.control_zone, t)
                pending[lane_id] -= 1
                spawned_now = True
                if scheduler in ("dfst", "opt_dfst"):
                    _assign_fifo_depth(
                        world, index, scheduler == "opt_dfst", t
                    )
            if spawned_now and scheduler == "mm":
                _resolve_matching(world, t)

        n = world.n
        if n:
            act = world.active[:n]
            if act.any():
                leader = world.leader_position(t)
                pos = world.pos[:n]
                vel = world.vel[:n]
                target = leader - world.depth[:n] * config.desired_gap
                err = target - pos
                world.ierr[:n][act] += err[act] * config.dt
                acc = (
                    config.kp * err
                    + config.ki * world.ierr[:n]
                    + config.kd * (config.desired_speed - vel)
                )
                np.clip(acc, -config.max_accel, config.max_accel, out=acc)
                in_box = (pos >= 0.0) & act
                acc[in_box] = config.max_accel
                vel_new = np.clip(
                    vel + acc * config.dt, 0.0, config.catch_up_speed
                )
                pos_new = pos + vel_new * config.dt
                entered = act & (pos < 0.0) & (pos_new >= 0.0)
                world.vel[:n] = np.where(act, vel_new, vel)
                world.pos[:n] = np.where(act, pos_new, pos)

                if entered.any():
                    leader_new = world.leader_position(t + config.dt)
                    for i in np.flatnonzero(entered):
                        slot = leader_new - world.depth[i] * config.desired_gap
                        entry_error_max = max(
                            entry_error_max, abs(slot - world.pos[i])
                        )
                        peers = act & (world.depth[:n] == world.depth[i])
                        peers[i] = False
                        if peers.any():
                            gap = np.max(
                                np.abs(world.pos[:n][peers] - world.pos[i])
                            )
                            sync_gap_max = max(sync_gap_max, float(gap))

                done = act & (
                    world.pos[:n] >= world.path_len[world.lane_of[:n]]
                )
                if done.any():
                    for i in np.flatnonzero(done):
                        world.exit_time[i] = t + config.dt
                        world.active[i] = False
                _audit_box(world, t + config.dt)

            if trajectory is not None and step % log_every == 0:
                for i in range(n):
                    if not world.active[i]:
                        continue
                    lane = world.lanes[world.lane_of[i]]
                    trajectory.write(
                        f"{t:.2f},{i + 1},{lane[0].value}:{lane[1].value},"
                        f"{world.pos[i]:.3f},{world.vel[i]:.3f},{world.depth[i]}\n"
                    )

        all_spawned = (
            world.n >= total_to_spawn
            and (arrivals is None or sum(pending) == 0)
        )
        if all_spawned and world.n and not world.active[: world.n].any():
            break
        if total_to_spawn == 0:
            break
        step += 1

    if fleet_out is not None:
        lane_counts: dict[int, int] = {}
        for body in world.bodies:
            lane = world.lanes[body.lane_id]
            rank = lane_counts.get(body.lane_id, 0)
            lane_counts[body.lane_id] = rank + 1
            fleet_out.append(
                VehicleRecord(
                    index=body.index,
                    approach=lane[0],
                    turn=lane[1],
                    position=config.control_zone + float(body.index),
                    same_lane_rank=rank,
                )
            )

    if world.n == 0:
        return SimMetrics(
            scheduler=scheduler,
            n_vehicles=0,
            evacuation_time=0.0,
            max_depth=0,
            travel_times={},
            seed=arrivals.seed if arrivals is not None else None,
        )

    first_spawn = float(np.nanmin(world.spawn_time[: world.n]))
    last_exit = float(np.nanmax(world.exit_time[: world.n]))
    travel = {
        i + 1: float(world.exit_time[i] - world.spawn_time[i])
        for i in range(world.n)
    }
    return SimMetrics(
        scheduler=scheduler,
        n_vehicles=world.n,
        evacuation_time=last_exit - first_spawn,
        max_depth=int(world.depth[: world.n].max()),
        travel_times=travel,
        seed=arrivals.seed if arrivals is not None else None,
        entry_error_max=float(entry_error_max),
        sync_gap_max=float(sync_gap_max),
    )


def _static_solve(world: _World) -> None:
    """One-shot schedule for a pre-placed fleet."""
    conflict_sets = {}
    for body in world.bodies:
        diverging = set(body.lane_preds)
        if not body.lane_preds:
            diverging.add(0)
        conflict_sets[body.index] = ConflictSets(
            body.crossing, frozenset(diverging)
        )
    cdg = build_cdg(conflict_sets, world.n)
    if world.scheduler == "dfst":
        schedule = dfst(cdg)
    elif world.scheduler == "opt_dfst":
        schedule = opt_dfst(cdg)
    else:
        schedule = mm_schedule(build_cug(cdg), cdg)
    for vehicle, d in schedule.depth.items():
        world.depth[vehicle - 1] = d
