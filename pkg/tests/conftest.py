from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def template_text() -> str:
    return (FIXTURES / "stories" / "template_spy.story").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def template_doc(template_text):
    from plotroom.story import parse_story

    doc, diags = parse_story(template_text)
    assert not diags
    return doc


@pytest.fixture(scope="session")
def shadows_plot_text() -> str:
    return (FIXTURES / "plots" / "shadows_of_betrayal.plot").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def shadows_plot(shadows_plot_text):
    from plotroom.plots import parse_plot

    return parse_plot(shadows_plot_text)


def prompt_fixture(name: str) -> str:
    return (FIXTURES / "prompts" / name).read_text(encoding="utf-8")


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"[ACCEPTANCE] {name}: {status}", flush=True)
