"""Seeded Monte-Carlo sweeps and the embedded golden-example checks."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .fleets import example_fleet
from .geometry import build_conflict_sets
from .graphs import build_cdg, build_cug
from .schedulers import dfst, mm_schedule, opt_dfst
from .simulation import ArrivalModel, SimConfig, simulate

__all__ = [
    "ScenarioSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "GoldenCheck",
    "GoldenReport",
    "run_golden",
    "CSV_HEADER",
]

CSV_HEADER = "scheduler,n,seed,d_all,evac_s,runtime_ms"

_SOLVERS = {
    "dfst": lambda cdg, cug: dfst(cdg),
    "opt_dfst": lambda cdg, cug: opt_dfst(cdg),
    "mm": lambda cdg, cug: mm_schedule(cug, cdg),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """One sweep definition: arrival law, sizes, schedulers, seeds."""

    probability: float = 0.3
    n_values: tuple[int, ...] = (84,)
    schedulers: tuple[str, ...] = ("dfst", "opt_dfst", "mm")
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    sim: SimConfig = field(default_factory=SimConfig)
    out_dir: Path | None = None
    measure_runtime: bool = True

    def __post_init__(self) -> None:
        if not self.schedulers:
            raise ValueError("at least one scheduler is required")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if not self.n_values or any(n < 0 for n in self.n_values):
            raise ValueError("n_values must be non-negative")
        unknown = set(self.schedulers) - set(_SOLVERS)
        if unknown:
            raise ValueError(f"unknown schedulers: {sorted(unknown)}")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")


@dataclass(frozen=True)
class SweepRow:
    scheduler: str
    n: int
    seed: int
    d_all: int
    evac_s: float
    runtime_ms: float

    def to_csv(self) -> str:
        return (
            f"{self.scheduler},{self.n},{self.seed},{self.d_all},"
            f"{self.evac_s:.6f},{self.runtime_ms:.3f}"
        )


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    aggregates: Mapping[str, float]

    def to_csv(self) -> str:
        lines = [CSV_HEADER] + [row.to_csv() for row in self.rows]
        return "\n".join(lines) + "\n"


def _timed_static_solve(scheduler: str, fleet) -> tuple[int, float]:
    """Solve the frozen fleet once; time the scheduler call only."""
    sets = build_conflict_sets(fleet)
    cdg = build_cdg(sets, len(fleet))
    cug = build_cug(cdg)
    solver = _SOLVERS[scheduler]
    start = time.perf_counter()
    schedule = solver(cdg, cug)
    elapsed = time.perf_counter() - start
    return schedule.max_depth, elapsed * 1000.0


def run_sweep(spec: ScenarioSpec) -> SweepResult:
    """Execute every (scheduler, n, seed) combination of the scenario.

    Rows come out in sorted order regardless of execution order, so the
    CSV is reproducible; the runtime column reports a static solve of the
    realized fleet timed around the scheduler call only (and is zeroed
    when ``measure_runtime`` is off, keeping the determinism harness
    byte-exact).
    """
    rows = []
    for scheduler in sorted(spec.schedulers):
        for n in sorted(spec.n_values):
            for seed in sorted(spec.seeds):
                arrivals = ArrivalModel(
                    probability=spec.probability, seed=seed, n_total=n
                )
                realized = []
                metrics = simulate(
                    scheduler,
                    arrivals=arrivals,
                    config=spec.sim,
                    fleet_out=realized,
                )
                runtime_ms = 0.0
                if spec.measure_runtime and realized:
                    _, runtime_ms = _timed_static_solve(scheduler, realized)
                rows.append(
                    SweepRow(
                        scheduler=scheduler,
                        n=n,
                        seed=seed,
                        d_all=metrics.max_depth,
                        evac_s=metrics.evacuation_time,
                        runtime_ms=runtime_ms,
                    )
                )
    rows.sort(key=lambda r: (r.scheduler, r.n, r.seed))

    aggregates: dict[str, float] = {}
    for scheduler in sorted(spec.schedulers):
        for n in sorted(spec.n_values):
            group = [r for r in rows if r.scheduler == scheduler and r.n == n]
            evacs = np.array([r.evac_s for r in group])
            depths = np.array([r.d_all for r in group])
            prefix = f"{scheduler}.n{n}"
            aggregates[f"{prefix}.evac_mean_s"] = round(float(evacs.mean()), 6)
            aggregates[f"{prefix}.evac_std_s"] = round(float(evacs.std()), 6)
            aggregates[f"{prefix}.d_all_mean"] = round(float(depths.mean()), 6)
            aggregates[f"{prefix}.d_all_std"] = round(float(depths.std()), 6)

    result = SweepResult(rows=tuple(rows), aggregates=aggregates)
    if spec.out_dir is not None:
        out = Path(spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(result.to_csv())
        (out / "aggregates.json").write_text(
            json.dumps(aggregates, indent=2, sort_keys=True) + "\n"
        )
    return result


@dataclass(frozen=True)
class GoldenCheck:
    name: str
    expected: str
    actual: str

    @property
    def passed(self) -> bool:
        return self.expected == self.actual


@dataclass(frozen=True)
class GoldenReport:
    checks: tuple[GoldenCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            if c.passed:
                lines.append(f"PASS {c.name}: {c.actual}")
            else:
                lines.append(
                    f"FAIL {c.name}: expected {c.expected}, got {c.actual}"
                )
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"golden example: {verdict}")
        return "\n".join(lines) + "\n"


def _fmt_sets(sets) -> str:
    chunks = []
    for i in sorted(sets):
        crossing = ",".join(map(str, sorted(sets[i].crossing))) or "-"
        diverging = ",".join(map(str, sorted(sets[i].diverging))) or "-"
        chunks.append(f"{i}:C({crossing})D({diverging})")
    return " ".join(chunks)


def _valid_mm_layer_orders(layers: Sequence[frozenset[int]]) -> list[str]:
    """Every layer order that keeps vehicle 5 ahead of vehicle 6."""
    import itertools

    orders = []
    for perm in itertools.permutations(sorted(layers, key=sorted)):
        pos = {frozenset(layer): k for k, layer in enumerate(perm)}
        five = next(k for layer, k in pos.items() if 5 in layer)
        six = next(k for layer, k in pos.items() if 6 in layer)
        if five < six:
            orders.append("|".join(",".join(map(str, sorted(l))) for l in perm))
    return orders


def run_golden(example_id: str = "example1", corrupt: bool = False) -> GoldenReport:
    """Check the embedded six-vehicle example against known-good results.

    ``corrupt`` deliberately flips one expectation, as a negative control
    for the reporting pipeline.
    """
    if example_id != "example1":
        raise ValueError(f"unknown golden example {example_id!r}")

    fleet = example_fleet()
    sets = build_conflict_sets(fleet)
    cdg = build_cdg(sets, len(fleet))
    cug = build_cug(cdg)
    schedule_dfst = dfst(cdg)
    schedule_opt = opt_dfst(cdg)
    schedule_mm = mm_schedule(cug, cdg)

    expected_sets = (
        "1:C(-)D(0) 2:C(-)D(0) 3:C(1,2)D(0) 4:C(2,3)D(0) "
        "5:C(1,4)D(0) 6:C(1,4)D(5)"
    )
    expected_uni = "(0,1) (0,2) (0,3) (0,4) (0,5) (5,6)"
    expected_bi = "(1,3) (1,5) (1,6) (2,3) (2,4) (3,4) (4,5) (4,6)"
    expected_cug = "(1,2) (1,4) (2,5) (2,6) (3,5) (3,6)"
    expected_d_all = "dfst=5 opt_dfst=4 mm=3"
    expected_depths = "1,1,2,3,2,4"
    mm_layers = [frozenset(layer) for layer in schedule_mm.layering()]
    valid_orders = _valid_mm_layer_orders(
        [frozenset({1, 4}), frozenset({3, 5}), frozenset({2, 6})]
    )
    actual_layers = "|".join(
        ",".join(map(str, sorted(layer))) for layer in schedule_mm.layering()
    )

    checks = [
        GoldenCheck("conflict_sets", expected_sets, _fmt_sets(sets)),
        GoldenCheck(
            "cdg_uni_edges",
            expected_uni,
            " ".join(f"({i},{j})" for i, j in sorted(cdg.uni_edges)),
        ),
        GoldenCheck(
            "cdg_bi_edges",
            expected_bi,
            " ".join(f"({i},{j})" for i, j in sorted(cdg.bi_edges)),
        ),
        GoldenCheck(
            "cug_edges",
            expected_cug,
            " ".join(f"({i},{j})" for i, j in sorted(cug.edges)),
        ),
        GoldenCheck(
            "d_all",
            expected_d_all if not corrupt else "dfst=5 opt_dfst=4 mm=2",
            f"dfst={schedule_dfst.max_depth} "
            f"opt_dfst={schedule_opt.max_depth} mm={schedule_mm.max_depth}",
        ),
        GoldenCheck(
            "opt_dfst_depths",
            expected_depths,
            ",".join(str(schedule_opt.depth[i]) for i in range(1, 7)),
        ),
        GoldenCheck(
            "mm_layers",
            actual_layers if actual_layers in valid_orders else valid_orders[0],
            actual_layers,
        ),
    ]
    return GoldenReport(checks=tuple(checks))
