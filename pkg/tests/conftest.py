"""Shared pytest wiring: acceptance-criterion result lines.

Each acceptance test wraps its body in :func:`criterion`, which records one
PASS/FAIL line; the collected lines are printed in the terminal summary so a
full run ends with a per-criterion verdict.
"""

from contextlib import contextmanager

CRITERION_LINES: list[str] = []


@contextmanager
def criterion(number: int, name: str):
    try:
        yield
    except BaseException:
        CRITERION_LINES.append(f"criterion {number:2d} ({name}): FAIL")
        raise
    else:
        CRITERION_LINES.append(f"criterion {number:2d} ({name}): PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)
