"""Conflict-free vehicle passing orders at unsignalized intersections.

The package builds conflict graphs over a 12-movement intersection,
solves passing orders with three schedulers (a FIFO depth baseline, its
layer-optimized variant, and a maximum-matching method), and measures
evacuation time in a virtual-platoon simulation under stochastic
arrivals.
"""

from .estimators import DFSTScheduler, MaxMatchingScheduler, OptDFSTScheduler
from .fleets import example_fleet, fleet_from_lanes, random_fleet
from .geometry import (
    Approach,
    ConflictClass,
    ConflictSets,
    IntersectionGeometry,
    Movement,
    Turn,
    VehicleRecord,
    build_conflict_sets,
    canonical_movement_paths,
    classify_conflict,
)
from .graphs import (
    CoexistingUndirectedGraph,
    ConflictDirectedGraph,
    build_cdg,
    build_cug,
    has_rooted_spanning_tree,
)
from .matching import Matching, brute_force_matching, maximum_matching
from .schedulers import (
    Layering,
    PassingSchedule,
    audit_schedule,
    dfst,
    find_opt_parent,
    mm_schedule,
    opt_dfst,
    repair_infeasible_pairs,
    spanning,
)
from .simulation import (
    ArrivalModel,
    SafetyViolationError,
    SimConfig,
    SimMetrics,
    VehicleState,
    controller_step,
    simulate,
    virtual_position,
)

__version__ = "0.1.0"

__all__ = [
    "Approach",
    "ArrivalModel",
    "CoexistingUndirectedGraph",
    "ConflictClass",
    "ConflictDirectedGraph",
    "ConflictSets",
    "DFSTScheduler",
    "IntersectionGeometry",
    "Layering",
    "Matching",
    "MaxMatchingScheduler",
    "Movement",
    "OptDFSTScheduler",
    "PassingSchedule",
    "SafetyViolationError",
    "SimConfig",
    "SimMetrics",
    "Turn",
    "VehicleRecord",
    "VehicleState",
    "audit_schedule",
    "brute_force_matching",
    "build_cdg",
    "build_conflict_sets",
    "build_cug",
    "canonical_movement_paths",
    "classify_conflict",
    "controller_step",
    "dfst",
    "example_fleet",
    "find_opt_parent",
    "fleet_from_lanes",
    "has_rooted_spanning_tree",
    "maximum_matching",
    "mm_schedule",
    "opt_dfst",
    "random_fleet",
    "repair_infeasible_pairs",
    "simulate",
    "spanning",
    "virtual_position",
]
