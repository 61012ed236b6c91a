from __future__ import annotations

import _acceptance_log


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_acceptance_log.LINES):
        terminalreporter.write_line(_acceptance_log.LINES[key])
