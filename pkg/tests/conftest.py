"""Prints one PASS/FAIL line per acceptance criterion at the end of the run.

Acceptance tests tag themselves with ``record_property("criterion", ...)`` and
may add a ``detail`` property with the measured numbers.
"""

_results: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        verdict = "PASS" if report.passed else "FAIL"
        _results[props["criterion"]] = (verdict, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_results, key=lambda s: int(s.split()[0])):
        verdict, detail = _results[name]
        line = f"{verdict}  criterion {name}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
