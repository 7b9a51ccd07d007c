"""Prints a one-line verdict per acceptance criterion after the run."""

import re


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_criterion_(\d+)_(\w+)", getattr(rep, "nodeid", ""))
            if m:
                rows.append((int(m.group(1)), outcome, m.group(2)))
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, outcome, label in sorted(rows):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  ({label})")
