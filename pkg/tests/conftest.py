from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"

_acceptance_lines: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line per acceptance criterion, then assert it."""

    def _record(name: str, ok: bool, detail: str = ""):
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))
        assert ok, f"{name}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
