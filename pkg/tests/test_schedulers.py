import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import min_feasible_layers
from passorder.fleets import (
    ALL_LANES,
    TWO_PHASE_LANES,
    fleet_from_lanes,
    random_fleet,
)
from passorder.geometry import Approach, Turn, build_conflict_sets
from passorder.graphs import build_cdg, build_cug
from passorder.schedulers import (
    audit_schedule,
    dfst,
    find_opt_parent,
    mm_schedule,
    opt_dfst,
    repair_infeasible_pairs,
    spanning,
)

A, T = Approach, Turn


def graphs_for(fleet):
    cdg = build_cdg(build_conflict_sets(fleet), len(fleet))
    return cdg, build_cug(cdg)


def all_three(cdg, cug):
    return dfst(cdg), opt_dfst(cdg), mm_schedule(cug, cdg)


class TestDfst:
    def test_example1_depth_five(self, example1):
        _, _, cdg, _ = example1
        schedule = dfst(cdg)
        assert schedule.max_depth == 5
        assert [schedule.depth[i] for i in range(1, 7)] == [1, 1, 2, 3, 4, 5]
        assert not audit_schedule(schedule, cdg)

    def test_single_vehicle(self):
        cdg, _ = graphs_for(fleet_from_lanes([(A.WEST, T.LEFT)]))
        schedule = dfst(cdg)
        assert schedule.depth == {1: 1}
        assert schedule.parent == {1: 0}

    def test_mutually_conflicting_chain(self):
        # Twelve vehicles on one lane: every pair diverging, forced chain.
        cdg, _ = graphs_for(fleet_from_lanes([(A.SOUTH, T.STRAIGHT)] * 12))
        assert dfst(cdg).max_depth == 12


class TestOptDfst:
    def test_example1_depth_vector(self, example1):
        _, _, cdg, _ = example1
        schedule = opt_dfst(cdg)
        assert [schedule.depth[i] for i in range(1, 7)] == [1, 1, 2, 3, 2, 4]
        assert [schedule.parent[i] for i in range(1, 7)] == [0, 0, 1, 3, 2, 4]
        assert schedule.max_depth == 4
        assert not audit_schedule(schedule, cdg)

    def test_single_vehicle(self):
        cdg, _ = graphs_for(fleet_from_lanes([(A.WEST, T.LEFT)]))
        schedule = opt_dfst(cdg)
        assert schedule.depth == {1: 1}

    def test_never_deeper_than_dfst(self):
        rng = np.random.default_rng(211)
        for _ in range(300):
            n = int(rng.integers(1, 45))
            cdg, _ = graphs_for(random_fleet(rng, n))
            assert opt_dfst(cdg).max_depth <= dfst(cdg).max_depth


class TestFindOptParent:
    def test_vehicle_three_case(self, example1):
        # After vehicles 1 and 2 at depth 1: lane floor 0, blocked {1}.
        depths = {0: 0, 1: 1, 2: 1}
        k = find_opt_parent(depths, {0, 1, 2}, frozenset({1, 2}), frozenset({0}))
        assert k == 1

    def test_vehicle_five_case(self):
        depths = {0: 0, 1: 1, 2: 1, 3: 2, 4: 3}
        k = find_opt_parent(depths, {0, 1, 4}, frozenset({1, 4}), frozenset({0}))
        assert k == 2  # coexisting anchor preferred over a crossing one

    def test_root_only(self):
        assert find_opt_parent({0: 0}, {0}, frozenset(), frozenset({0})) == 0

    def test_empty_candidates_return_root(self):
        assert find_opt_parent({0: 0}, set(), frozenset(), frozenset()) == 0


class TestFifoProperty:
    @settings(max_examples=60, deadline=None)
    @given(
        lanes=st.lists(st.sampled_from(ALL_LANES), min_size=2, max_size=16),
    )
    def test_adding_a_vehicle_keeps_existing_depths(self, lanes):
        full = fleet_from_lanes(lanes)
        cdg_full, _ = graphs_for(full)
        cdg_head, _ = graphs_for(full[:-1])
        for solver in (dfst, opt_dfst):
            with_last = solver(cdg_full)
            without = solver(cdg_head)
            for i in range(1, len(lanes)):
                assert with_last.depth[i] == without.depth[i]


class TestRepair:
    def test_theorem_one_exchange(self, example1):
        _, _, cdg, _ = example1
        repaired = repair_infeasible_pairs([(1, 4), (3, 6), (2, 5)], cdg)
        assert repaired == [(1, 4), (3, 5), (2, 6)]

    def test_feasible_input_unchanged(self, example1):
        _, _, cdg, _ = example1
        pairs = [(1, 4), (2, 5), (3, 6)]
        assert repair_infeasible_pairs(pairs, cdg) == pairs

    def test_overlapping_pairs_rejected(self, example1):
        _, _, cdg, _ = example1
        with pytest.raises(ValueError):
            repair_infeasible_pairs([(1, 4), (4, 5)], cdg)

    def test_random_outputs_pass_order_audit(self):
        rng = np.random.default_rng(223)
        for _ in range(100):
            n = int(rng.integers(4, 25))
            fleet = random_fleet(rng, n, lanes=TWO_PHASE_LANES)
            cdg, cug = graphs_for(fleet)
            edges = sorted(cug.edges)
            if not edges:
                continue
            rng.shuffle(edges)
            taken, used = [], set()
            for a, b in edges:
                if a not in used and b not in used:
                    taken.append((a, b))
                    used.update((a, b))
            repaired = repair_infeasible_pairs(taken, cdg)
            # same cardinality, and in-order feasibility restored
            assert len(repaired) == len(taken)
            for pos_a in range(len(repaired)):
                for pos_b in range(pos_a + 1, len(repaired)):
                    for x in repaired[pos_a]:
                        for y in repaired[pos_b]:
                            assert not (
                                y < x and (y, x) in cdg.uni_edges
                            ), "later unit holds an in-lane predecessor"


class TestSpanning:
    def test_example1_unit_order(self, example1):
        _, _, cdg, _ = example1
        schedule = spanning([(1, 4), (2, 6), (3, 5)], cdg)
        layers = [set(layer) for layer in schedule.layering()]
        assert layers == [{1, 4}, {3, 5}, {2, 6}]
        assert not audit_schedule(schedule, cdg)

    def test_unconstrained_units_keep_index_order(self, example1):
        _, _, cdg, _ = example1
        schedule = spanning([(1, 4)], cdg, loose=(2, 3, 5, 6))
        assert schedule.depth[1] == 1
        assert not audit_schedule(schedule, cdg)

    def test_partition_validation(self, example1):
        _, _, cdg, _ = example1
        with pytest.raises(ValueError, match="partition"):
            spanning([(1, 4)], cdg, loose=(2, 3))
        with pytest.raises(ValueError, match="overlap"):
            spanning([(1, 4), (4, 5)], cdg, loose=(2, 3, 6))

    def test_precedence_respected_on_random_fleets(self):
        rng = np.random.default_rng(227)
        for _ in range(150):
            n = int(rng.integers(1, 35))
            fleet = random_fleet(rng, n)
            cdg, cug = graphs_for(fleet)
            schedule = mm_schedule(cug, cdg)
            for i, j in cdg.uni_edges:
                if i >= 1:
                    assert schedule.depth[i] < schedule.depth[j]


class TestMaximumMatchingMethod:
    def test_example1_layers(self, example1):
        _, _, cdg, cug = example1
        schedule = mm_schedule(cug, cdg)
        assert schedule.max_depth == 3
        assert [set(layer) for layer in schedule.layering()] == [
            {1, 4},
            {3, 5},
            {2, 6},
        ]
        assert schedule.split_pairs == 0

    def test_single_vehicle(self):
        cdg, cug = graphs_for(fleet_from_lanes([(A.NORTH, T.RIGHT)]))
        schedule = mm_schedule(cug, cdg)
        assert schedule.max_depth == 1

    def test_right_turns_share_layers(self):
        # Four right-turners from four approaches may all pass at once.
        lanes = [(a, T.RIGHT) for a in Approach]
        cdg, cug = graphs_for(fleet_from_lanes(lanes))
        assert mm_schedule(cug, cdg).max_depth == 1

    def test_matches_exhaustive_minimum_on_small_fleets(self):
        rng = np.random.default_rng(229)
        for _ in range(120):
            n = int(rng.integers(1, 9))
            fleet = random_fleet(rng, n, lanes=TWO_PHASE_LANES)
            cdg, cug = graphs_for(fleet)
            schedule = mm_schedule(cug, cdg)
            assert schedule.max_depth == min_feasible_layers(fleet, cdg)


class TestCrossSchedulerProperties:
    def test_dominance_chain(self):
        rng = np.random.default_rng(233)
        for _ in range(250):
            n = int(rng.integers(1, 50))
            cdg, cug = graphs_for(random_fleet(rng, n))
            a, b, c = all_three(cdg, cug)
            assert c.max_depth <= b.max_depth <= a.max_depth

    def test_lemma2_and_structure_audits(self):
        rng = np.random.default_rng(239)
        for _ in range(120):
            n = int(rng.integers(1, 40))
            cdg, cug = graphs_for(random_fleet(rng, n))
            for schedule in all_three(cdg, cug):
                assert not audit_schedule(schedule, cdg)

    def test_schedule_export_format(self, example1):
        _, _, cdg, _ = example1
        text = opt_dfst(cdg).to_text()
        assert text.splitlines() == [
            "1 0 1",
            "2 0 1",
            "3 1 2",
            "4 3 3",
            "5 2 2",
            "6 4 4",
        ]

    def test_layering_partitions_fleet(self, example1):
        _, _, cdg, cug = example1
        for schedule in all_three(cdg, cug):
            seen = [v for layer in schedule.layering() for v in layer]
            assert sorted(seen) == list(range(1, 7))
