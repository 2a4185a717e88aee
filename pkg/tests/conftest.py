_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "check" in props:
        _ACCEPTANCE.append((props["check"], report.passed, props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance checks")
    for label, passed, measured in _ACCEPTANCE:
        line = f"{'PASS' if passed else 'FAIL'}  {label}"
        terminalreporter.write_line(f"{line}  [{measured}]" if measured else line)
