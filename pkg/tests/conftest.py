"""Shared test plumbing: the acceptance checklist printed after the run.

Acceptance tests record one entry per criterion through the ``acceptance``
fixture; the terminal summary then prints a single pass/fail line for each,
so the gate status is readable without scrolling through pytest output.
"""

import pytest

_CRITERIA = {
    1: "gradient integrity",
    2: "categorical sampling oracle",
    3: "temperature limit behavior",
    4: "structural contracts",
    5: "scorer oracle equivalence",
    6: "end-to-end learning",
    7: "label ablation ordering at 20% data",
    8: "scarce-data degradation",
    9: "determinism",
}
_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record a criterion outcome, then assert it (so pytest fails too)."""
    def record(num: int, passed: bool, detail: str = "") -> None:
        _RESULTS[num] = (bool(passed), detail)
        assert passed, f"criterion {num} ({_CRITERIA[num]}): {detail}"
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title in _CRITERIA.items():
        if num in _RESULTS:
            ok, detail = _RESULTS[num]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "NOT RUN", ""
        line = f"[{num}] {status:7s} {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
