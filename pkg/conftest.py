"""Shared pytest wiring: print one line per acceptance check at the end.

Test modules that define module-level ACCEPTANCE_RESULTS (a list of
(name, status) tuples, status in {"PASS", "FAIL", "SKIP"}) get their
entries echoed in the terminal summary so the gate is readable without
scraping the pytest report.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = []
    for module in list(sys.modules.values()):
        results = getattr(module, "ACCEPTANCE_RESULTS", None)
        if isinstance(results, list) and results:
            entries.extend(results)
    if not entries:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance checks")
    for name, status in entries:
        terminalreporter.write_line(f"ACCEPTANCE {name}: {status}")
