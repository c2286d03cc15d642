ACCEPTANCE = []


def record(num: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.append(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
