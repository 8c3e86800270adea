"""Shared test plumbing: the acceptance summary block printed after the run."""

ACCEPTANCE_RESULTS = []


def record_criterion(number, label, ok, detail=""):
    ACCEPTANCE_RESULTS.append((number, label, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.write_sep("-", "acceptance criteria")
    for number, label, ok, detail in sorted(ACCEPTANCE_RESULTS):
        line = "[%s] criterion %02d: %s" % ("PASS" if ok else "FAIL",
                                            number, label)
        if detail:
            line += " (%s)" % detail
        tr.write_line(line)
