import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []
SUITE_BUDGET_S = 30.0
SUITE_BUDGET_CRITERION: int | None = None
_START: list[float] = []


def pytest_sessionstart(session):
    _START.append(time.perf_counter())


def pytest_sessionfinish(session, exitstatus):
    # the runtime part of the locomotion criterion covers the whole session
    if SUITE_BUDGET_CRITERION is None:
        return
    elapsed = time.perf_counter() - _START[0]
    tag = f"CRITERION {SUITE_BUDGET_CRITERION}:"
    for i, line in enumerate(ACCEPTANCE_LINES):
        if line.startswith(tag):
            ok = elapsed < SUITE_BUDGET_S
            line = f"{line}; suite runtime {elapsed:.1f} s (< {SUITE_BUDGET_S:.0f} s)"
            if not ok:
                line = line.replace(f"{tag} PASS", f"{tag} FAIL", 1)
                session.exitstatus = 1
            ACCEPTANCE_LINES[i] = line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
