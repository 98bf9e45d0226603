import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "shortest-path oracle",
    2: "negative-cycle detection",
    3: "RIP infinity bound",
    4: "failure schedule fidelity",
    5: "packet conservation",
    6: "convergence-activity ordering",
    7: "drop ordering",
    8: "delay ordering in failure windows",
    9: "path selection on the fast topology",
    10: "loop freedom under single-link failures",
    11: "compare determinism",
}

_outcomes = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    num = int(report.nodeid.split("test_criterion_")[1][:2])
    if report.when == "call" or report.failed:
        _outcomes.setdefault(num, "PASS" if report.passed else "FAIL")
        if report.failed:
            _outcomes[num] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {num:2d} {_outcomes[num]}: {CRITERIA[num]}")
