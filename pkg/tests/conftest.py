import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("NPOL_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set NPOL_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records a pass/fail line and asserts."""
    def record(n: int, ok: bool, detail: str = "") -> None:
        ACCEPTANCE.setdefault(n, []).append((bool(ok), detail))
        assert ok, f"criterion {n}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        for ok, detail in ACCEPTANCE[n]:
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
