import re

ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    outcome: dict[int, str] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            m = ACCEPTANCE.search(getattr(rep, "nodeid", ""))
            if not m:
                continue
            n = int(m.group(1))
            verdict = {"passed": "PASS", "skipped": "SKIPPED"}.get(status, "FAIL")
            # a failure in any phase wins over a pass in another
            if outcome.get(n) != "FAIL":
                outcome[n] = verdict
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcome):
        terminalreporter.write_line(f"ACCEPTANCE criterion {n}: {outcome[n]}")
