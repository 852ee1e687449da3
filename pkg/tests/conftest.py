import pytest

VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict(capsys):
    """Record and print a one-line pass/fail verdict for an acceptance criterion."""

    def record(n: int, ok: bool, detail: str) -> None:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        VERDICTS[n] = line
        with capsys.disabled():
            print(f"\n{line}")

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
