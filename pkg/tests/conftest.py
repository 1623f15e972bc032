from pathlib import Path

import pytest

from sid.graph import load_graph

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def fixture_graph(name: str):
    return load_graph(FIXTURES / f"{name}.graph")


@pytest.fixture
def fig():
    return fixture_graph


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
