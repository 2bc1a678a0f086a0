import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tolopt.ingest import PartDataset, PartKey


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    outcomes = []
    for status in ("passed", "failed"):
        for report in terminalreporter.stats.get(status, []):
            if report.when == "call" and "test_acceptance.py" in report.nodeid:
                outcomes.append((report.nodeid.split("::")[-1], status.upper()))
    if outcomes:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(outcomes):
            terminalreporter.write_line(f"{status:6s} {name}")

CANONICAL_HEADER = "model,part_number,inspection_type,value,tolerance,machine_flagged,disposition,timestamp"


@pytest.fixture
def small_csv() -> str:
    rows = [
        CANONICAL_HEADER,
        "M1,P1,solder,41.0,42.62,true,false_call,2024-01-01T00:00:00Z",
        "M1,P1,solder,40.0,42.62,true,false_call,2024-01-01T01:00:00Z",
        "M1,P1,solder,39.5,42.62,true,false_call,",
        "M1,P1,solder,30.0,42.62,true,true_defect,2024-01-02T00:00:00Z",
        "M1,P1,solder,42.62,42.62,false,not_reviewed,",
        "M2,P2,solder,20.0,25.0,true,false_call,",
        "M2,P2,solder,18.0,25.0,true,false_call,",
        "M2,P2,solder,12.0,25.0,true,true_defect,",
    ]
    return "\n".join(rows) + "\n"


@pytest.fixture
def decade_part() -> PartDataset:
    # Ten equally spaced false calls; the worked example for rank 8.2.
    return PartDataset(
        key=PartKey("P1", "solder"),
        current_tolerance=101.0,
        false_call_values=tuple(float(v) for v in range(10, 101, 10)),
        models=("M1",),
    )
