import util


def pytest_terminal_summary(terminalreporter):
    if not util.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in util.ACCEPTANCE:
        terminalreporter.write_line(line)
