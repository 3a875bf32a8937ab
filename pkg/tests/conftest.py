import json
from pathlib import Path

import pytest

GOLDEN = Path(__file__).parent / "golden"

# (criterion number, description, passed) rows filled in by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool]] = []


@pytest.fixture(scope="session")
def golden():
    return {p.stem: json.loads(p.read_text()) for p in GOLDEN.glob("*.json")}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, text, ok in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
