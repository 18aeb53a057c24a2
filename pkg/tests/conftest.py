from __future__ import annotations

import pytest

# acceptance verdicts, printed once at the end of the run
VERDICTS: list = []


def pytest_addoption(parser):
    parser.addoption("--heavy", action="store_true", default=False,
                     help="also run presets that are too large for CI")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--heavy"):
        return
    skip = pytest.mark.skip(reason="heavy preset; run with --heavy")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(VERDICTS, key=lambda v: v[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def verdict():
    def record(number: int, ok: bool, detail: str = ""):
        VERDICTS.append((number, bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record
