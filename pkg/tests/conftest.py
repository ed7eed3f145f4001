import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# (number, passed, detail) entries recorded by test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda x: str(x[0]).zfill(3)):
        label = f"criterion {key}" if isinstance(key, int) else key
        terminalreporter.write_line(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")
