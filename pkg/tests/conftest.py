import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from passorder.fleets import example_fleet
from passorder.geometry import build_conflict_sets, default_geometry
from passorder.graphs import build_cdg, build_cug

# One line per acceptance criterion, emitted after the run so pytest's
# output capture cannot swallow the scorecard.
ACCEPTANCE_LINES: dict[int, str] = {}

_CRITERION = re.compile(r"test_criterion_(\d+)")


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    number = int(match.group(1))
    if report.failed:
        ACCEPTANCE_LINES[number] = f"criterion {number:2d} FAIL — see failure log"
    elif report.skipped:
        ACCEPTANCE_LINES[number] = f"criterion {number:2d} SKIP"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance scorecard")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def geometry():
    return default_geometry()


@pytest.fixture(scope="session")
def example1():
    fleet = example_fleet()
    sets = build_conflict_sets(fleet)
    cdg = build_cdg(sets, len(fleet))
    cug = build_cug(cdg)
    return fleet, sets, cdg, cug
