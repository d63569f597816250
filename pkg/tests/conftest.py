"""Shared pytest plumbing: replay the acceptance summary lines at the end.

The acceptance tests print one measured PASS/FAIL line each; stdout capture
would hide those for passing tests, so they are also collected and written
into the terminal summary where they survive a plain `pytest -v` run.
"""

import acceptance_report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_report.LINES:
        terminalreporter.section("acceptance summary")
        for line in acceptance_report.LINES:
            terminalreporter.write_line(line)
