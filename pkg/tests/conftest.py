"""Collects acceptance-criterion verdicts and prints them after the run."""

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS, key=lambda ln: int(ln.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
