"""Shared pytest wiring.

The acceptance suite gets a per-criterion verdict block at the end of the
terminal report so a red run names the broken contract directly.
"""

_verdicts: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.failed:
        _verdicts[name] = "FAIL"
    elif report.skipped:
        _verdicts.setdefault(name, "SKIP")
    elif report.when == "call" and report.passed:
        _verdicts.setdefault(name, "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _verdicts.items():
        terminalreporter.write_line(f"{verdict}  {name}")
