import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    number = getattr(item.function, "acceptance_criterion", None)
    if number is not None and report.when == "call":
        title = item.function.acceptance_title
        detail = "" if report.passed else str(call.excinfo.value).splitlines()[0][:160] if call.excinfo else ""
        ACCEPTANCE_RESULTS[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
