"""Collects acceptance-criterion outcomes and prints one verdict line per criterion."""

import pytest

_verdicts = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed or report.skipped:
        prev = _verdicts.get(number)
        details = [str(v) for k, v in item.user_properties if k == "measured"]
        verdict = "FAIL" if failed else ("SKIP" if report.skipped else "PASS")
        if prev is None or prev[0] == "PASS":
            _verdicts[number] = (verdict, title, details)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        verdict, title, details = _verdicts[number]
        line = f"criterion {number:2d}: {verdict}  {title}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
